#ifndef QTUBE_OSCILLATORY_HPP
#define QTUBE_OSCILLATORY_HPP

#include <functional>
#include <vector>

#include "qtube/kernels.hpp"

namespace qtube {

/// Regulator schedule eps -> eps(1 - i delta), Richardson-extrapolated to
/// delta -> 0 with the three-point rule (8 r(d/4) - 6 r(d/2) + r(d))/3.
struct RegulatorSchedule {
  double d0 = 0.05, d1 = 0.025, d2 = 0.0125;
};

Complex richardson3(Complex r_d0, Complex r_d1, Complex r_d2);

/// One regulated step of the reduced wavefunction psi by the closed-form
/// mode kernel: psi'(x) = Int dz K_k(x, z; eps) psi(z), evaluated at the
/// target points. The kinetic Gaussian carries the regulator; the potential
/// phase (at the later point) does not.
std::vector<Complex> kernel_step_mode_closed(
    const TubeGeometry& geom, const PhysicsConstants& c, int k,
    const std::vector<double>& targets, const std::function<Complex(double)>& psi0,
    double eps, const RegulatorSchedule& reg = {});

/// One regulated step of the 2D radial part u (Psi = Phi_k u) by the full
/// short-time propagator with the fibre integral done numerically over the
/// covering space:  u'(x) = Int dz b(z) [Int dphi e^{-ik dphi} K(x, z, dphi)] u(z).
/// The world-function expansion is anchored at the target point, which makes
/// the inner integral a one-parameter family tabulated over its quadratic
/// coefficient.
std::vector<Complex> kernel_step_mode_full(
    const TubeGeometry& geom, const PhysicsConstants& c, int k,
    const std::vector<double>& targets, const std::function<Complex(double)>& u0,
    double eps, const RegulatorSchedule& reg = {});

/// Largest component magnitude of the normalized, regulated Gaussian-moment
/// integral (see kernels.hpp); declared here next to its implementation knobs.
double gaussian_moment_residual_impl(const TubeGeometry& geom,
                                     const PhysicsConstants& c, double x0,
                                     double eps, const RegulatorSchedule& reg);

}  // namespace qtube

#endif
