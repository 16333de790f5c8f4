#ifndef QTUBE_PDE_HPP
#define QTUBE_PDE_HPP

#include <vector>

#include "qtube/kernels.hpp"
#include "qtube/spectral.hpp"

namespace qtube {

/// Real tridiagonal operator; lower[0] and upper[n-1] are unused.
struct Tridiag {
  std::vector<double> lower, diag, upper;
  int n() const { return static_cast<int>(diag.size()); }
};

/// One Crank-Nicolson step  u <- (1 + i dt H / 2 hbar)^{-1} (1 - i dt H / 2 hbar) u
/// with Dirichlet ends (u[0], u[n-1] pinned to zero).
void cn_step(const Tridiag& H, double dt, double hbar, std::vector<Complex>& u);

/// -hbar^2/2m d^2/dx^2 (3-point) + V_cl + [delta_V]; acts on the reduced psi.
Tridiag reduced_hamiltonian(const TubeGeometry& geom, const PhysicsConstants& c,
                            const Grid1D& grid, double E_phi, bool include_delta_v,
                            double eta = 0.0);

/// Mode-k block of the covariant 2D Hamiltonian acting on the radial part u
/// (Psi = Phi_k u): flux-form (1/b) d(b d u) on staggered midpoint b values
/// + (hbar^2/2m) xi R + V0 + hbar^2 k^2/(2 m b^2). Hermitian under the
/// b-weighted inner product by construction.
Tridiag mode_block_hamiltonian(const TubeGeometry& geom, const PhysicsConstants& c,
                               const Grid1D& grid, int k, double eta = 0.0);

/// Same block conjugated by b^{1/2} (acts on chi = b^{1/2} u): plainly
/// symmetric, used by the time-dependent stepper so the flat chi-norm
/// (= covariant norm) is conserved exactly.
Tridiag mode_block_hamiltonian_sym(const TubeGeometry& geom,
                                   const PhysicsConstants& c, const Grid1D& grid,
                                   int k, double eta = 0.0);

/// In-place DFT along phi rows; radix-2 when n is a power of two, naive
/// otherwise. sign = -1 forward (e^{-i 2 pi jk/n}), +1 inverse (unscaled).
void dft_inplace(std::vector<Complex>& a, int sign);

/// Static covariant 2D evolution, spectral in phi and Crank-Nicolson in x.
class Full2DStepper {
 public:
  Full2DStepper(const TubeGeometry& geom, const PhysicsConstants& c,
                const Grid1D& xgrid, int n_phi, double dt);
  void step(WaveField2D& f) const;

 private:
  std::vector<Tridiag> blocks_;  // per mode bin
  Grid1D xgrid_;
  int n_phi_;
  double dt_, hbar_;
};

/// Time-dependent covariant evolution for b(x, t) (history coupling with
/// f == 1, eta = t). Advances g^{1/4} Psi with the midpoint Hamiltonian, which
/// conserves the time-dependent covariant norm exactly; with_compensation=false
/// drops the -(i hbar d/2) dt ln b term (ablation) by stepping Psi directly.
class TimeDepStepper {
 public:
  TimeDepStepper(const TubeGeometry& geom, const PhysicsConstants& c,
                 const Grid1D& xgrid, int n_phi, double dt,
                 bool with_compensation = true);
  void step(WaveField2D& f, double t);  // advances t -> t + dt

 private:
  const TubeGeometry geom_;
  PhysicsConstants c_;
  Grid1D xgrid_;
  int n_phi_;
  double dt_;
  bool comp_;
};

struct EvolveOptions {
  bool abort_on_boundary_mass = true;
  double warn_ratio = 1e-6;    // the documented boundary-mass warning level
  double abort_ratio = 1e-4;   // contamination level that aborts the run
};

WaveField2D evolve_full_2d(const WaveField2D& field, const TubeGeometry& geom,
                           const PhysicsConstants& c, double dt, int steps,
                           const EvolveOptions& opts = {});

WaveField1D evolve_reduced_1d(const WaveField1D& field, const TubeGeometry& geom,
                              const PhysicsConstants& c, double E_phi, double dt,
                              int steps, bool include_delta_v,
                              const EvolveOptions& opts = {});

/// Reduced evolution with eta = t (time-dependent V_cl, delta_V); used by the
/// f == 1 history bridge.
WaveField1D evolve_reduced_time_dep(const WaveField1D& field,
                                    const TubeGeometry& geom,
                                    const PhysicsConstants& c, double E_phi,
                                    double dt, int steps, bool include_delta_v,
                                    double t0 = 0.0);

WaveField2D evolve_time_dependent(const WaveField2D& field, const TubeGeometry& geom,
                                  const PhysicsConstants& c, double dt, int steps,
                                  double t0 = 0.0, bool with_compensation = true);

double expectation_x(const WaveField1D& f);
double expectation_x(const WaveField2D& f, const TubeGeometry& geom,
                     double eta = 0.0);

bool boundary_mass_exceeds(const WaveField1D& f, double ratio);
bool boundary_mass_exceeds(const WaveField2D& f, double ratio);

/// r_i = m (x_{i+1} - 2 x_i + x_{i-1})/dt^2 + grad_i for the interior snapshots;
/// grad_i is the expectation of d(V_cl + delta_V)/dx at snapshot i.
std::vector<double> ehrenfest_residual(const std::vector<double>& mean_x,
                                       const std::vector<double>& mean_grad,
                                       double dt_snap, double mass);

}  // namespace qtube

#endif
