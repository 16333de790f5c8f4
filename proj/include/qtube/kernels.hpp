#ifndef QTUBE_KERNELS_HPP
#define QTUBE_KERNELS_HPP

#include <complex>
#include <functional>
#include <vector>

#include "qtube/geometry.hpp"

namespace qtube {

using Complex = std::complex<double>;

/// Scalar potential V0(x): zero, harmonic (m omega^2 (x-c)^2 / 2), or a
/// polynomial sum_i c_i x^i. Closed-form first derivative throughout.
class Potential {
 public:
  Potential() = default;
  static Potential zero();
  static Potential harmonic(double m_omega_sq, double center = 0.0);
  static Potential poly(std::vector<double> coeffs);

  double operator()(double x) const;
  double derivative(double x) const;
  bool is_zero() const { return kind_ == Kind::zero; }

 private:
  enum class Kind { zero, harmonic, poly } kind_ = Kind::zero;
  double m_omega_sq_ = 0.0, center_ = 0.0;
  std::vector<double> coeffs_;
};

struct PhysicsConstants {
  double mass = 1.0;
  double hbar = 1.0;
  double xi = 0.0;
  Potential V0;
};

struct EffectivePotentialTerms {
  double V_cl = 0.0;
  double delta_V = 0.0;
  double E_phi = 0.0;
  double x = 0.0;
};

/// Assemble both potential pieces at one point (V_cl reproducible from the
/// parts by construction).
EffectivePotentialTerms effective_potential_terms(const TubeGeometry& geom,
                                                  const PhysicsConstants& c,
                                                  double x, double E_phi,
                                                  double eta = 0.0);

/// Uniform time lattice t_n = n*eps with positions x_n, n = 0..N.
struct DiscretePath {
  double eps = 0.0;
  std::vector<double> x;
  std::vector<double> phi;  // optional, same length as x when used
};

/// Slice bookkeeping for time- and history-dependent radii. Static steps use
/// the default (all zeros): the compensation factor is then exactly 1 and the
/// radius pairing sits at eta = 0.
struct StepContext {
  double eta_prev = 0.0;  // accumulated eta at step start (time-dep: t_{n-1})
  double eta_curr = 0.0;  // accumulated eta at step end   (time-dep: t_n)
  double f_later = 0.0;   // f(x_n); 1 for pure time dependence, 0 static
};

double capacity_S(const TubeGeometry& geom, double x, double cell_scale, int d,
                  double eta = 0.0);

/// Quantum correction from the radius profile (b-form), at (x, eta).
double delta_v_eff_from_b(const TubeGeometry& geom, const PhysicsConstants& c,
                          double x, int d, double eta = 0.0);

/// Same from raw derivative values; lets tests perturb b'' independently.
double delta_v_eff_from_derivs(double b, double db, double d2b,
                               const PhysicsConstants& c, int d);

/// Quantum correction from a capacity function (S-form). When closed-form
/// derivatives are not supplied they are taken by central differences of S
/// at the given step.
double delta_v_eff_from_S(const std::function<double(double)>& S,
                          const PhysicsConstants& c, double x, int d,
                          const std::function<double(double)>* dS = nullptr,
                          const std::function<double(double)>* d2S = nullptr,
                          double fd_step = 1e-4);

double classical_effective_potential(const TubeGeometry& geom,
                                     const PhysicsConstants& c, double x,
                                     double E_phi, double eta = 0.0);

/// d/dx of V_cl + delta_V_eff at (x, eta); V_cl part closed form, the
/// delta_V part by central differences of the closed-form values.
double effective_force_gradient(const TubeGeometry& geom, const PhysicsConstants& c,
                                double x, double E_phi, bool include_delta_v,
                                double eta = 0.0, double fd_step = 1e-5);

/// Winding-sum conventions for the full short-time kernel. A hard cutoff
/// leaves a jump where the image window shifts across the angle-reduction
/// seam; the cosine taper weights every image by a smooth function of its
/// effective angle (untapered inside (2 w_max - 1) pi, zero beyond
/// (2 w_max + 1) pi), which makes the kernel periodic and seam-free and
/// sharpens the truncation tail of fibre quadratures. The Taylor sigma is
/// only trustworthy to |w| = 1 (quartic turnover); pass a GeodesicSigmaTable
/// for exact images beyond that.
struct WindingOptions {
  int w_max = 2;
  bool taper = false;
  const GeodesicSigmaTable* sigma_table = nullptr;
};

/// Full short-time propagator on the tube (D = d+1 = 2), windings summed
/// coherently. First position pair is the later slice. The world-function
/// radius pairing sits at the earlier step value ctx.eta_prev; curvature, V0
/// and the compensation term -(i hbar d/2) dt ln b are evaluated at the later
/// point (x_later, ctx.eta_curr).
Complex short_time_full(const TubeGeometry& geom, const PhysicsConstants& c,
                        double x_later, double x_earlier, double dphi, double eps,
                        const StepContext& ctx = {},
                        const WindingOptions& wopt = {});

/// Mode-k short-time kernel (the phi-integrated form). b, V0 and delta_V_eff
/// evaluated at the later point (x_later, ctx.eta_curr).
Complex short_time_mode(const TubeGeometry& geom, const PhysicsConstants& c, int k,
                        double x_later, double x_earlier, double eps,
                        const StepContext& ctx = {});

/// sum_n eps [ m/2 ((x_n-x_{n-1})/eps)^2 - (V_cl(x_n) + delta_V(x_n, eta_n)) ];
/// include_delta_v = false gives the classical reduced action. When f is
/// supplied, eta_n are the prefix sums eps*sum f(x_j) along the path.
double semiclassical_action(const DiscretePath& path, const TubeGeometry& geom,
                            const PhysicsConstants& c, double E_phi,
                            bool include_delta_v = true,
                            const std::function<double(double)>* f = nullptr);

/// Largest component magnitude of the regulated Gaussian-moment integral
///   norm * Int d^2 dq sqrt(g) e^{i m sigma / hbar eps} [grad^i s grad^j s - (i hbar eps/m) g^ij],
/// Richardson-extrapolated over regulator values delta -> 0. Contract: O(eps^{3/2}).
double gaussian_moment_residual(const TubeGeometry& geom, const PhysicsConstants& c,
                                double x, double eps);

/// (b(x,eta)/b(x,eta - eps*f))^{d/2}; equals exp{(d/2) eps f d_eta ln b} + O(eps^2).
double history_measure_factor(const TubeGeometry& geom, double x, double eta,
                              double eps, double f_value, int d);

}  // namespace qtube

#endif
