#ifndef QTUBE_GEOMETRY_HPP
#define QTUBE_GEOMETRY_HPP

#include <optional>
#include <vector>
#include <utility>

#include "qtube/profile.hpp"

namespace qtube {

/// Tube configuration space ds^2 = dx^2 + b(x)^2 dphi^2 restricted to a
/// finite x-interval. d is the fibre dimension; the end-to-end pipeline is
/// built for the d=1 circle, d>1 only enters the pointwise potential formulas.
struct TubeGeometry {
  RadiusProfile profile;
  int d = 1;
  double phi_period = 6.283185307179586476925286766559;  // 2*pi
  double x_min = -1e30;
  double x_max = 1e30;

  bool in_domain(double x) const { return x >= x_min && x <= x_max; }
};

struct WorldPointPair {
  double x = 0.0;        // base point (Taylor anchor / earlier slice)
  double x_prime = 0.0;  // other point
  double delta_phi = 0.0;
  int winding = 0;
};

/// Reduce an angle to [-pi, pi).
double reduce_angle(double dphi);

/// R(x) = -2 b''(x) / b(x) for the d=1 tube metric.
double scalar_curvature(const TubeGeometry& geom, double x, double eta = 0.0);

/// Fourth-order small-separation expansion of Synge's world function,
/// 2*sigma = dx^2 + bbar^2 dphi^2 - (b b''/6) dx^2 dphi^2 - ((b b')^2/12) dphi^4,
/// with bbar^2 = b(x')b(x). The quartic coefficients are symmetrized over the
/// two endpoints (a same-order choice that makes the evaluator exactly
/// symmetric under argument exchange).
/// eta selects the single time/history value at which every radius factor is
/// evaluated (the radius pairing); the default 0 is the static case.
/// pair.winding shifts delta_phi by 2*pi*winding before use.
double world_function_taylor(const TubeGeometry& geom, const WorldPointPair& pair,
                             double eta = 0.0);

/// Same polynomial from raw coefficients; lets tests inject perturbed
/// derivatives without building a profile.
double sigma_taylor_from_coeffs(double bbar_sq, double b_d2b, double b_db_sq,
                                double dx, double dphi);

/// Synge's world function by solving the geodesic boundary value problem
/// (shooting on the initial angle, bisection + secant refinement).
/// Throws std::runtime_error with diagnostics when shooting fails or the
/// geodesic leaves [x_min, x_max].
double world_function_geodesic(const TubeGeometry& geom, const WorldPointPair& pair,
                               double endpoint_tol = 1e-11);

/// Minimize sigma over windings |w| <= w_max of the raw (unreduced) angle.
/// Ties prefer smaller |w|, then smaller signed effective angle.
std::pair<double, int> min_winding_sigma(const TubeGeometry& geom, double x,
                                         double x_prime, double delta_phi_raw,
                                         int w_max = 2, bool use_geodesic = true);

/// Exact world function sampled over the metric angle for a fixed set of
/// x-values, built once with warm-started shooting and interpolated with a
/// four-point stencil. sigma(xa, xb, u) is the world function between
/// (xa, phi) and (xb, phi + u) of the static profile; history couplings of
/// the form b(x) e^{g(eta)} rescale the angle, u = e^{g} * dphi_effective.
/// The Taylor expansion breaks beyond its quartic turnover, so winding sums
/// past |w| = 1 must come from here.
class GeodesicSigmaTable {
 public:
  GeodesicSigmaTable(const TubeGeometry& geom, std::vector<double> x_values,
                     double u_max, int points_per_pi = 32);

  double sigma(double xa, double xb, double u) const;
  double u_max() const { return u_max_; }

 private:
  int index_of(double x) const;
  std::vector<double> xs_;
  double u_max_;
  double du_;
  int n_u_;
  std::vector<std::vector<double>> table_;  // [pair][iu], pair = upper triangle
};

}  // namespace qtube

#endif
