#ifndef QTUBE_SLICED_HPP
#define QTUBE_SLICED_HPP

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "qtube/kernels.hpp"
#include "qtube/spectral.hpp"

namespace qtube {

/// Slice-to-slice dynamics of the radius: static, time-dependent (eta = t,
/// i.e. f == 1) or history-dependent (eta_n = eps * sum f(x_j)). The
/// time-dependent case runs through the identical code path as history with
/// f == 1.
struct PathDynamics {
  enum class Kind { static_case, time_dependent, history } kind = Kind::static_case;
  std::function<double(double)> f;

  static PathDynamics static_case_() { return {}; }
  static PathDynamics time_dependent_() {
    PathDynamics d;
    d.kind = Kind::time_dependent;
    d.f = [](double) { return 1.0; };
    return d;
  }
  static PathDynamics history_(std::function<double(double)> f) {
    PathDynamics d;
    d.kind = Kind::history;
    d.f = std::move(f);
    return d;
  }
  double f_at(double x) const { return kind == Kind::static_case ? 0.0 : f(x); }
};

/// Complex propagator matrix between grid points, with the quadrature weights
/// baked in. K[i*n+j] maps the earlier point x_j to the later point x_i.
struct KernelMatrix {
  Grid1D grid;
  double eps = 0.0;
  int slices = 1;
  std::vector<Complex> K;
  std::vector<double> weights;  // trapezoid (x measure b^d for covariant kernels)

  int n() const { return grid.n; }
  Complex at(int i, int j) const { return K[static_cast<size_t>(i) * grid.n + j]; }
  /// psi_out = K * diag(w) * psi_in
  std::vector<Complex> apply(const std::vector<Complex>& psi) const;
};

/// Repeated quadrature-weighted multiplication; steps = 1 returns the kernel
/// unchanged. Deterministic accumulation order.
KernelMatrix compose(const KernelMatrix& kernel, int steps);

/// One-slice mode-k kernel matrix on the grid (trapezoid weights).
KernelMatrix one_step_reduced(const TubeGeometry& geom, const PhysicsConstants& c,
                              int k, const Grid1D& grid, double eps);

/// N-slice mode-k propagator, composed from one_step_reduced at eps = T/N.
KernelMatrix reduced_path_propagator(const TubeGeometry& geom,
                                     const PhysicsConstants& c, int k,
                                     const Grid1D& grid, double T, int N);

struct ModeSumResult {
  Complex value{0.0, 0.0};
  double tail_estimate = 0.0;  // |outermost k shell| / |value|
  bool tail_flagged = false;
};

/// K(x_f, phi_f, x_0, phi_0; T) = sum_k Phi_k(phi_f) Phi_k^*(phi_0)
/// (b_f b_0)^{-d/2} K_k[i_f, i_0], |k| <= k_max. Endpoints must lie on the grid.
ModeSumResult mode_sum_propagator(const TubeGeometry& geom, const PhysicsConstants& c,
                                  const Grid1D& grid, double x_f, double phi_f,
                                  double x_0, double phi_0, double T, int N,
                                  int k_max, double tail_tolerance = 0.1);

struct BruteForceSpec {
  Grid1D x_grid;
  int n_phi = 8;
  double x_f = 0.0, phi_f = 0.0, x_0 = 0.0, phi_0 = 0.0;
  double T = 1.0;
  int N = 2;
  PathDynamics dynamics;
  WindingOptions windings;  // cutoff, taper, optional exact sigma table
  long long budget = 10'000'000;  // maximum number of enumerated paths
};

/// Exact lattice path sum over all interior points: measure b(x_n, eta_n)^d
/// per interior slice and short_time_full factors, eta accumulated along each
/// enumerated path. Deterministic enumeration order.
Complex brute_force_full(const TubeGeometry& geom, const PhysicsConstants& c,
                         const BruteForceSpec& spec);

/// Same sum through a state-binned engine: slice kernels are tabulated per
/// reachable eta value (the accumulator takes finitely many values on a
/// lattice), interior paths are enumerated once with partial products, and
/// final-slice contractions give both the pointwise value and projections
/// onto fibre modes of the final angle. Agrees with brute_force_full to
/// rounding; orders of magnitude faster when slices repeat.
struct BruteForceProjection {
  Complex pointwise{0.0, 0.0};
  std::map<int, Complex> final_modes;  // kappa -> sum_jf dphi e^{-i kappa phi_jf} K(...)
  long long paths = 0;
};
BruteForceProjection brute_force_projected(const TubeGeometry& geom,
                                           const PhysicsConstants& c,
                                           const BruteForceSpec& spec,
                                           const std::vector<int>& kappas);

/// Least-squares slope of log(e) against log(h); entries must be positive.
double fit_convergence_order(const std::vector<std::pair<double, double>>& h_e);

}  // namespace qtube

#endif
