/* Geometry of the tube configuration space: curvature, Taylor expansion of
 * Synge's world function, and an independent geodesic boundary-value solver
 * used as the oracle for the expansion. Geodesics are integrated in arclength
 * with the Clairaut constant J = b^2 phi' conserved; shooting is on the
 * initial angle with a bracket scan (log-refined near the axial directions)
 * followed by bisection. GeodesicSigmaTable samples sigma over the metric
 * angle with warm-started shooting for the winding sums, where the Taylor
 * polynomial is out of range.
 */
#include "qtube/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qtube {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

double reduce_angle(double dphi) {
  double r = std::remainder(dphi, 2.0 * kPi);
  if (r >= kPi) r -= 2.0 * kPi;  // remainder returns (-pi, pi]; map pi -> -pi
  return r;
}

double scalar_curvature(const TubeGeometry& geom, double x, double eta) {
  if (!geom.in_domain(x))
    throw std::invalid_argument("scalar_curvature: x outside domain");
  return -2.0 * geom.profile.d2b(x, eta) / geom.profile.b(x, eta);
}

double sigma_taylor_from_coeffs(double bbar_sq, double b_d2b, double b_db_sq,
                                double dx, double dphi) {
  const double dx2 = dx * dx;
  const double dphi2 = dphi * dphi;
  const double two_sigma = dx2 + bbar_sq * dphi2 - (b_d2b / 6.0) * dx2 * dphi2 -
                           (b_db_sq / 12.0) * dphi2 * dphi2;
  return 0.5 * two_sigma;
}

double world_function_taylor(const TubeGeometry& geom, const WorldPointPair& pair,
                             double eta) {
  const double dphi = pair.delta_phi + 2.0 * kPi * pair.winding;
  const double dx = pair.x_prime - pair.x;
  const double b0 = geom.profile.b(pair.x, eta);
  const double b1 = geom.profile.b(pair.x_prime, eta);
  const double db0 = geom.profile.db(pair.x, eta);
  const double db1 = geom.profile.db(pair.x_prime, eta);
  const double d2b0 = geom.profile.d2b(pair.x, eta);
  const double d2b1 = geom.profile.d2b(pair.x_prime, eta);
  // endpoint-symmetrized quartic coefficients (differences are beyond the
  // order of the expansion)
  const double b_d2b = 0.5 * (b0 * d2b0 + b1 * d2b1);
  const double b_db_sq = 0.5 * (b0 * b0 * db0 * db0 + b1 * b1 * db1 * db1);
  return sigma_taylor_from_coeffs(b1 * b0, b_d2b, b_db_sq, dx, dphi);
}

namespace {

struct GeoState {
  double x, phi, v;  // v = dx/ds; dphi/ds = J / b^2
};

// Unit-speed geodesic flow with conserved J = b^2 dphi/ds:
//   x'' = J^2 b'(x)/b(x)^3,   phi' = J/b^2
void geo_rhs(const RadiusProfile& prof, double J, const GeoState& s, GeoState& d) {
  const double b = prof.b(s.x);
  d.x = s.v;
  d.phi = J / (b * b);
  d.v = J * J * prof.db(s.x) / (b * b * b);
}

GeoState rk4_step(const RadiusProfile& prof, double J, const GeoState& s, double h) {
  GeoState k1, k2, k3, k4, t;
  geo_rhs(prof, J, s, k1);
  t = {s.x + 0.5 * h * k1.x, s.phi + 0.5 * h * k1.phi, s.v + 0.5 * h * k1.v};
  geo_rhs(prof, J, t, k2);
  t = {s.x + 0.5 * h * k2.x, s.phi + 0.5 * h * k2.phi, s.v + 0.5 * h * k2.v};
  geo_rhs(prof, J, t, k3);
  t = {s.x + h * k3.x, s.phi + h * k3.phi, s.v + h * k3.v};
  geo_rhs(prof, J, t, k4);
  return {s.x + h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
          s.phi + h / 6.0 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi),
          s.v + h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

struct ShotResult {
  bool valid = false;
  double x_at_target = 0.0;  // x when phi first reaches phi_target
  double arclength = 0.0;
};

// Integrate from (x0, 0) with initial angle theta in (0, pi) until
// phi = phi_target > 0. phi is strictly monotone along the flow (J > 0), so
// the event is well defined. Invalid if the trajectory leaves the x-domain
// or exhausts the arclength budget first.
ShotResult shoot(const TubeGeometry& geom, double x0, double phi_target,
                 double theta, double s_max, int n_steps) {
  const RadiusProfile& prof = geom.profile;
  const double b0 = prof.b(x0);
  const double J = b0 * std::sin(theta);
  GeoState s{x0, 0.0, std::cos(theta)};
  const double h = s_max / n_steps;
  ShotResult out;
  for (int i = 0; i < n_steps; ++i) {
    GeoState nxt = rk4_step(prof, J, s, h);
    if (!std::isfinite(nxt.x) || nxt.x < geom.x_min || nxt.x > geom.x_max) return out;
    if (nxt.phi >= phi_target) {
      // bisect the crossing inside the last step
      double lo = 0.0, hi = h;
      GeoState base = s;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        GeoState m = rk4_step(prof, J, base, mid);
        if (m.phi >= phi_target)
          hi = mid;
        else
          lo = mid;
      }
      GeoState fin = rk4_step(prof, J, base, 0.5 * (lo + hi));
      out.valid = true;
      out.x_at_target = fin.x;
      out.arclength = i * h + 0.5 * (lo + hi);
      return out;
    }
    s = nxt;
  }
  return out;
}

// scan angles: uniform plus log-refined wings (geodesics with tiny J need
// theta resolution near 0 and pi)
std::vector<double> scan_angles(double theta_hint) {
  std::vector<double> t;
  for (int i = 1; i < 64; ++i) t.push_back(kPi * i / 64);
  for (int e = 2; e <= 12; ++e) {
    t.push_back(kPi * std::pow(2.0, -e));
    t.push_back(kPi * (1.0 - std::pow(2.0, -e)));
  }
  if (theta_hint > 0.0 && theta_hint < kPi) {
    for (double f : {0.5, 0.8, 0.95, 1.0, 1.05, 1.25, 2.0}) {
      const double th = theta_hint * f;
      if (th > 0.0 && th < kPi) t.push_back(th);
    }
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

struct GeodesicSolution {
  double sigma;
  double theta;
};

GeodesicSolution solve_geodesic(const TubeGeometry& geom, double x0, double x1,
                                double dphi_eff, double endpoint_tol,
                                double theta_hint = -1.0) {
  if (std::abs(dphi_eff) < 1e-14) {
    // the x-line phi = const is an exact geodesic of this metric
    return {0.5 * (x1 - x0) * (x1 - x0), x1 >= x0 ? 0.0 : kPi};
  }
  const double phi_target = std::abs(dphi_eff);
  const double dx = x1 - x0;

  // local radius bound: geodesics never need to wander beyond a few direct
  // lengths from the endpoints
  const double b_ends = std::max(geom.profile.b(x0), geom.profile.b(x1));
  const double reach = 1.5 * (std::abs(dx) + b_ends * phi_target + 1.0);
  double b_hi = b_ends;
  for (int i = 0; i <= 32; ++i) {
    const double xs = std::clamp(std::min(x0, x1) - reach +
                                     (std::abs(x1 - x0) + 2 * reach) * i / 32.0,
                                 geom.x_min, geom.x_max);
    b_hi = std::max(b_hi, geom.profile.b(xs));
  }
  const double s_max = 1.6 * (std::abs(dx) + b_hi * phi_target) + 1.0;

  auto miss = [&](double theta, int n_steps) -> std::optional<double> {
    ShotResult r = shoot(geom, x0, phi_target, theta, s_max, n_steps);
    if (!r.valid) return std::nullopt;
    return r.x_at_target - x1;
  };

  const int n_coarse = std::clamp(static_cast<int>(s_max * 120.0), 600, 6000);
  const int n_fine = std::clamp(static_cast<int>(s_max * 700.0), 4000, 32000);

  // bracketed secant/bisection hybrid, coarse integrations early and fine
  // ones once the bracket is tight
  auto refine = [&](double lo, double hi, double flo) -> GeodesicSolution {
    auto fhi_opt = miss(hi, n_coarse);
    double fhi = fhi_opt ? *fhi_opt : 1e300;
    for (int it = 0; it < 64 && hi - lo > 1e-14; ++it) {
      const int n_int = (hi - lo > 1e-6) ? n_coarse : n_fine;
      double cand = 0.5 * (lo + hi);
      if (fhi < 1e200 && std::abs(fhi - flo) > 1e-300) {
        const double sec = lo - flo * (hi - lo) / (fhi - flo);
        if (sec > lo + 0.05 * (hi - lo) && sec < hi - 0.05 * (hi - lo)) cand = sec;
      }
      auto fm = miss(cand, n_int);
      if (!fm) {  // fell out of domain between valid brackets
        hi = cand;
        fhi = 1e300;
        continue;
      }
      if (flo * (*fm) <= 0.0) {
        hi = cand;
        fhi = *fm;
      } else {
        lo = cand;
        flo = *fm;
      }
    }
    const double th = 0.5 * (lo + hi);
    ShotResult r = shoot(geom, x0, phi_target, th, s_max, n_fine);
    if (!r.valid ||
        std::abs(r.x_at_target - x1) > endpoint_tol * std::max(1.0, std::abs(x1)))
      return {-1.0, 0.0};
    return {0.5 * r.arclength * r.arclength, th};
  };

  // warm start: expand a bracket around the hint before falling back to the
  // global scan
  if (theta_hint > 0.0 && theta_hint < kPi) {
    double width = 0.02;
    for (int grow = 0; grow < 6; ++grow, width *= 3.0) {
      const double lo = std::max(theta_hint - width, 1e-9);
      const double hi = std::min(theta_hint + width, kPi - 1e-9);
      auto flo = miss(lo, n_coarse);
      auto fhi = miss(hi, n_coarse);
      if (flo && fhi && (*flo) * (*fhi) <= 0.0) {
        GeodesicSolution sol = refine(lo, hi, *flo);
        if (sol.sigma >= 0.0) return sol;
      }
      if (lo <= 1e-9 && hi >= kPi - 1e-9) break;
    }
  }

  std::vector<double> thetas, misses;
  for (double th : scan_angles(theta_hint)) {
    auto m = miss(th, n_coarse);
    if (m) {
      thetas.push_back(th);
      misses.push_back(*m);
    }
  }
  if (thetas.size() < 2) {
    std::ostringstream os;
    os << "geodesic shooting failed: no valid trajectories (x=" << x0 << " -> " << x1
       << ", dphi=" << dphi_eff << ", domain [" << geom.x_min << "," << geom.x_max
       << "])";
    throw std::runtime_error(os.str());
  }

  double best_sigma = -1.0, best_theta = 0.0;
  for (size_t i = 0; i + 1 < thetas.size(); ++i) {
    if (misses[i] == 0.0 || misses[i] * misses[i + 1] < 0.0) {
      GeodesicSolution sol = refine(thetas[i], thetas[i + 1], misses[i]);
      if (sol.sigma >= 0.0 && (best_sigma < 0.0 || sol.sigma < best_sigma)) {
        best_sigma = sol.sigma;
        best_theta = sol.theta;
      }
    }
  }
  if (best_sigma < 0.0) {
    std::ostringstream os;
    os << "geodesic shooting failed: no converged bracket (x=" << x0 << " -> " << x1
       << ", dphi=" << dphi_eff << "); the geodesic may leave [" << geom.x_min << ","
       << geom.x_max << "]";
    throw std::runtime_error(os.str());
  }
  return {best_sigma, best_theta};
}

}  // namespace

double world_function_geodesic(const TubeGeometry& geom, const WorldPointPair& pair,
                               double endpoint_tol) {
  if (!geom.in_domain(pair.x) || !geom.in_domain(pair.x_prime))
    throw std::invalid_argument("world_function_geodesic: endpoint outside domain");
  const double dphi = pair.delta_phi + 2.0 * kPi * pair.winding;
  return solve_geodesic(geom, pair.x, pair.x_prime, dphi, endpoint_tol).sigma;
}

std::pair<double, int> min_winding_sigma(const TubeGeometry& geom, double x,
                                         double x_prime, double delta_phi_raw,
                                         int w_max, bool use_geodesic) {
  const double reduced = reduce_angle(delta_phi_raw);
  // winding that performs the reduction; the scan is centered on it so the
  // reported winding refers to the raw angle
  const int w_shift = static_cast<int>(std::lround((reduced - delta_phi_raw) / (2.0 * kPi)));

  double best = 0.0;
  int best_w = 0;
  bool first = true;
  for (int dw = -w_max; dw <= w_max; ++dw) {
    const int w_total = w_shift + dw;
    WorldPointPair p{x, x_prime, delta_phi_raw, w_total};
    const double sigma = use_geodesic ? world_function_geodesic(geom, p)
                                      : world_function_taylor(geom, p);
    const double eff = delta_phi_raw + 2.0 * kPi * w_total;
    const double best_eff = delta_phi_raw + 2.0 * kPi * best_w;
    const bool better =
        first || sigma < best - 1e-12 * std::max(1.0, best) ||
        (std::abs(sigma - best) <= 1e-12 * std::max(1.0, best) &&
         (std::abs(w_total) < std::abs(best_w) ||
          (std::abs(w_total) == std::abs(best_w) && eff < best_eff)));
    if (better) {
      best = sigma;
      best_w = w_total;
      first = false;
    }
  }
  return {best, best_w};
}

GeodesicSigmaTable::GeodesicSigmaTable(const TubeGeometry& geom,
                                       std::vector<double> x_values, double u_max,
                                       int points_per_pi)
    : xs_(std::move(x_values)), u_max_(u_max) {
  n_u_ = std::max(9, static_cast<int>(std::ceil(points_per_pi * u_max / kPi)) + 1);
  du_ = u_max / (n_u_ - 1);
  const int n = static_cast<int>(xs_.size());
  table_.assign(static_cast<size_t>(n) * (n + 1) / 2, {});

  size_t p = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b, ++p) {
      std::vector<double>& row = table_[p];
      row.resize(n_u_);
      double hint = -1.0;
      for (int iu = 0; iu < n_u_; ++iu) {
        const double u = du_ * iu;
        GeodesicSolution sol = solve_geodesic(geom, xs_[a], xs_[b], u, 2e-9, hint);
        row[iu] = sol.sigma;
        hint = sol.theta;  // warm start the next angle
      }
    }
}

int GeodesicSigmaTable::index_of(double x) const {
  for (size_t i = 0; i < xs_.size(); ++i)
    if (std::abs(xs_[i] - x) < 1e-9) return static_cast<int>(i);
  throw std::invalid_argument("GeodesicSigmaTable: x not among tabulated values");
}

double GeodesicSigmaTable::sigma(double xa, double xb, double u) const {
  int a = index_of(xa), b = index_of(xb);
  if (a > b) std::swap(a, b);
  const int n = static_cast<int>(xs_.size());
  const size_t p = static_cast<size_t>(a) * n - static_cast<size_t>(a) * (a - 1) / 2 +
                   (b - a);
  const std::vector<double>& row = table_[p];
  const double ua = std::abs(u);
  if (ua > u_max_ + 1e-9)
    throw std::invalid_argument("GeodesicSigmaTable: angle beyond tabulated range");
  double t = ua / du_;
  int i = static_cast<int>(std::floor(t));
  i = std::clamp(i, 1, n_u_ - 3);
  const double s = t - i;
  const double f0 = row[i - 1], f1 = row[i], f2 = row[i + 1], f3 = row[i + 2];
  const double s2 = s * s, s3 = s2 * s;
  return f0 * (-s3 + 3 * s2 - 2 * s) / 6.0 + f1 * (3 * s3 - 6 * s2 - 3 * s + 6) / 6.0 +
         f2 * (-3 * s3 + 3 * s2 + 6 * s) / 6.0 + f3 * (s3 - s) / 6.0;
}

}  // namespace qtube
