#ifndef QTUBE_HISTORY_HPP
#define QTUBE_HISTORY_HPP

#include <functional>
#include <vector>

#include "qtube/sliced.hpp"

namespace qtube {

/// Deterministic accumulator eta[x(t)] = Int f(x) dt together with its grid
/// for the augmented evolution.
struct HistoryContext {
  std::function<double(double)> f;
  double eta_min = 0.0;
  double eta_max = 1.0;
  int n_eta = 33;

  double deta() const { return (eta_max - eta_min) / (n_eta - 1); }
  double eta(int j) const { return eta_min + deta() * j; }
};

/// eta_n = eps * sum_{k=1..n} f(x_k) along a uniform path (eta_0 = 0 included).
std::vector<double> eta_of_path(const DiscretePath& path,
                                const std::function<double(double)>& f);

enum class EndpointWeight {
  none,     // bare product of mode kernels (reduced wavefunction evolution)
  per_path  // x (b(x_f, eta_N) b(x_0, 0))^{-d/2}, for full-propagator assembly
};

/// Sum over 1D lattice paths of prod_n short_time_mode with V_cl and
/// delta_V_eff evaluated at (x_n, eta_n); eta accumulated per path.
Complex history_reduced_brute_force(const TubeGeometry& geom,
                                    const PhysicsConstants& c, int k,
                                    const Grid1D& x_grid, double x_f, double x_0,
                                    double T, int N, const PathDynamics& dyn,
                                    EndpointWeight ew = EndpointWeight::per_path,
                                    long long budget = 10'000'000);

/// Wavefunction on the (x, eta) grid, row-major v[ix * n_eta + ieta].
struct AugmentedField {
  Grid1D xgrid;
  HistoryContext ctx;
  std::vector<Complex> v;

  Complex& at(int ix, int je) { return v[static_cast<size_t>(ix) * ctx.n_eta + je]; }
  const Complex& at(int ix, int je) const {
    return v[static_cast<size_t>(ix) * ctx.n_eta + je];
  }
  /// coherent eta-marginal: psi(x) = sum_j Psi(x, eta_j) * deta
  WaveField1D marginal() const;
  double norm_sq() const;  // sum |Psi|^2 dx deta
};

AugmentedField make_augmented_delta(const WaveField1D& psi0, const HistoryContext& ctx,
                                    double eta_start = 0.0);

/// Operator-split step: unitary x-step at fixed eta (potential at the
/// midpoint eta + f dt/2), then exact eta-advection by f(x) dt with
/// monotonicity-limited cubic interpolation (integer shifts are gathered
/// exactly). Throws on eta-range overflow.
void augmented_step(AugmentedField& field, const TubeGeometry& geom,
                    const PhysicsConstants& c, double E_phi, double dt,
                    bool include_delta_v = true);

AugmentedField augmented_grid_evolution(const AugmentedField& field,
                                        const TubeGeometry& geom,
                                        const PhysicsConstants& c, double E_phi,
                                        double dt, int steps,
                                        bool include_delta_v = true);

}  // namespace qtube

#endif
