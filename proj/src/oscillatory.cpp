/* Regulated oscillatory integrals. All integrals here damp the kinetic phase
 * with eps -> eps(1 - i delta) and extrapolate delta -> 0 by the three-point
 * Richardson rule; trapezoid grids are sized so the fastest chirp is sampled
 * with several points per wavelength and the first alias stationary point
 * falls outside the window.
 */
#include "qtube/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtube {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kLambda = 32.0;  // damping target exp(-Lambda) at the window edge
constexpr int kPtsPerWave = 6;
}  // namespace

Complex richardson3(Complex r_d0, Complex r_d1, Complex r_d2) {
  // nodes d0, d0/2, d0/4: removes the delta and delta^2 terms
  return (8.0 * r_d2 - 6.0 * r_d1 + r_d0) / 3.0;
}

namespace {

struct Window {
  double half_width;  // L
  int n;              // points across [-L, L]
};

Window kinetic_window(double mass, double hbar, double eps, double delta,
                      double quad_coef /* effective mass of the phase, >= */) {
  const double C = 1.0 + delta * delta;
  const double L = std::sqrt(2.0 * kLambda * hbar * eps * C / (mass * delta * quad_coef));
  const int n = static_cast<int>(
      std::ceil(kPtsPerWave * mass * quad_coef * L * L / (kPi * hbar * eps))) | 1;
  return {L, std::max(n, 33)};
}

}  // namespace

std::vector<Complex> kernel_step_mode_closed(
    const TubeGeometry& geom, const PhysicsConstants& c, int k,
    const std::vector<double>& targets, const std::function<Complex(double)>& psi0,
    double eps, const RegulatorSchedule& reg) {
  if (eps <= 0.0) throw std::invalid_argument("kernel_step_mode_closed: eps <= 0");
  const double deltas[3] = {reg.d0, reg.d1, reg.d2};
  std::vector<std::vector<Complex>> per_delta(3);

  for (int q = 0; q < 3; ++q) {
    const double delta = deltas[q];
    const Complex eps_c = eps * Complex(1.0, -delta);
    const Complex a = Complex(0, 1) * c.mass / (2.0 * c.hbar * eps_c);
    const Complex pref = std::sqrt(c.mass / (2.0 * kPi * c.hbar) / eps_c *
                                   Complex(0.0, -1.0));
    const Window w = kinetic_window(c.mass, c.hbar, eps, delta, 1.0);
    const double h = 2.0 * w.half_width / (w.n - 1);

    per_delta[q].reserve(targets.size());
    for (double xt : targets) {
      Complex acc(0, 0);
      for (int i = 0; i < w.n; ++i) {
        const double z = xt - w.half_width + h * i;
        const double dz = z - xt;
        const double wt = (i == 0 || i == w.n - 1) ? 0.5 : 1.0;
        acc += wt * std::exp(a * dz * dz) * psi0(z);
      }
      const double b = geom.profile.b(xt);
      const double V = c.V0(xt) + (c.hbar * k) * (c.hbar * k) / (2.0 * c.mass * b * b) +
                       delta_v_eff_from_b(geom, c, xt, geom.d);
      const Complex pot_phase = std::exp(Complex(0, -1) * eps / c.hbar * V);
      per_delta[q].push_back(pref * h * acc * pot_phase);
    }
  }

  std::vector<Complex> out(targets.size());
  for (size_t i = 0; i < targets.size(); ++i)
    out[i] = richardson3(per_delta[0][i], per_delta[1][i], per_delta[2][i]);
  return out;
}

namespace {

// Tabulated fibre integral J(beta) = Int dphi e^{-ik dphi} exp{a (beta dphi^2 - c2 dphi^4)}
// with a = i m / (2 hbar eps_c); evaluated by symmetric trapezoid, cubically
// interpolated in beta.
class FibreTable {
 public:
  FibreTable(double beta_min, double beta_max, double c2, int k, Complex a,
             double mass, double hbar, double eps, double delta) {
    n_beta_ = 257;
    beta_min_ = beta_min;
    dbeta_ = (beta_max - beta_min) / (n_beta_ - 1);
    if (dbeta_ <= 0.0) dbeta_ = 1.0;  // constant-radius case: single column
    vals_.resize(n_beta_);

    const double C = 1.0 + delta * delta;
    double L = std::sqrt(2.0 * kLambda * hbar * eps * C / (mass * delta * beta_min));
    if (c2 > 0.0) L = std::min(L, 0.85 * std::sqrt(beta_min / (2.0 * c2)));
    const double gmax = mass * beta_max * L / (hbar * eps) + std::abs(k);
    int n = static_cast<int>(std::ceil(kPtsPerWave * gmax * L / (2.0 * kPi))) | 1;
    n = std::max(n, 65);
    const double h = L / (n - 1);

    for (int ib = 0; ib < n_beta_; ++ib) {
      const double beta = beta_min + dbeta_ * ib;
      Complex acc(0, 0);
      for (int i = 0; i < n; ++i) {
        const double p = h * i;
        const double wt = (i == 0) ? 0.5 : (i == n - 1 ? 0.5 : 1.0);
        const Complex ph = std::exp(a * (beta * p * p - c2 * p * p * p * p));
        acc += wt * 2.0 * std::cos(k * p) * ph;  // even integrand, folded
      }
      vals_[ib] = acc * h;
    }
  }

  Complex operator()(double beta) const {
    double t = (beta - beta_min_) / dbeta_;
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 1, n_beta_ - 3);
    const double s = t - i;
    // 4-point Lagrange on nodes i-1..i+2
    const Complex f0 = vals_[i - 1], f1 = vals_[i], f2 = vals_[i + 1], f3 = vals_[i + 2];
    const double s2 = s * s, s3 = s2 * s;
    return f0 * (-s3 + 3 * s2 - 2 * s) / 6.0 + f1 * (3 * s3 - 6 * s2 - 3 * s + 6) / 6.0 +
           f2 * (-3 * s3 + 3 * s2 + 6 * s) / 6.0 + f3 * (s3 - s) / 6.0;
  }

 private:
  int n_beta_;
  double beta_min_, dbeta_;
  std::vector<Complex> vals_;
};

}  // namespace

std::vector<Complex> kernel_step_mode_full(
    const TubeGeometry& geom, const PhysicsConstants& c, int k,
    const std::vector<double>& targets, const std::function<Complex(double)>& u0,
    double eps, const RegulatorSchedule& reg) {
  if (eps <= 0.0) throw std::invalid_argument("kernel_step_mode_full: eps <= 0");
  const double deltas[3] = {reg.d0, reg.d1, reg.d2};
  std::vector<std::vector<Complex>> per_delta(3);

  for (int q = 0; q < 3; ++q) {
    const double delta = deltas[q];
    const Complex eps_c = eps * Complex(1.0, -delta);
    const Complex a = Complex(0, 1) * c.mass / (2.0 * c.hbar * eps_c);
    const Complex pref2 = c.mass / (2.0 * kPi * c.hbar * Complex(0, 1) * eps_c);
    const Window w = kinetic_window(c.mass, c.hbar, eps, delta, 1.0);

    per_delta[q].reserve(targets.size());
    for (double xt : targets) {
      const double bt = geom.profile.b(xt);
      const double c1 = bt * geom.profile.d2b(xt) / 6.0;
      const double c2 = bt * bt * geom.profile.db(xt) * geom.profile.db(xt) / 12.0;

      // clamp the window where the cross term would degenerate the quadratic
      // coefficient; beyond the clamp the damped kernel and the decaying test
      // state make the truncated tail negligible
      Window wt_loc = w;
      if (c1 > 0.0) {
        const double cap = 0.8 * std::sqrt(bt * bt / (2.0 * c1));
        const double kinetic_width = std::sqrt(c.hbar * eps / (c.mass * 1.0));
        if (cap < 3.0 * kinetic_width)
          throw std::runtime_error(
              "kernel_step_mode_full: expansion validity window is narrower "
              "than the kinetic width; decrease eps or flatten the profile");
        if (cap < wt_loc.half_width) {
          wt_loc.half_width = cap;
          wt_loc.n = static_cast<int>(std::ceil(kPtsPerWave * c.mass * cap * cap /
                                                (kPi * c.hbar * eps))) | 1;
          wt_loc.n = std::max(wt_loc.n, 33);
        }
      }
      const double hh = 2.0 * wt_loc.half_width / (wt_loc.n - 1);

      // range of the effective quadratic coefficient over the window
      double beta_min = 1e300, beta_max = -1e300;
      for (int i = 0; i < wt_loc.n; ++i) {
        const double z = xt - wt_loc.half_width + hh * i;
        const double dz = z - xt;
        const double beta = bt * geom.profile.b(z) - c1 * dz * dz;
        beta_min = std::min(beta_min, beta);
        beta_max = std::max(beta_max, beta);
      }
      beta_min = std::max(beta_min, 0.2 * bt * bt);
      beta_max = std::max(beta_max, beta_min);
      FibreTable J(beta_min, beta_max, c2, k, a, c.mass, c.hbar, eps, delta);

      Complex acc(0, 0);
      for (int i = 0; i < wt_loc.n; ++i) {
        const double z = xt - wt_loc.half_width + hh * i;
        const double dz = z - xt;
        const double wt = (i == 0 || i == wt_loc.n - 1) ? 0.5 : 1.0;
        const double beta =
            std::max(bt * geom.profile.b(z) - c1 * dz * dz, beta_min);
        acc += wt * geom.profile.b(z) * std::exp(a * dz * dz) * J(beta) * u0(z);
      }
      const double R = scalar_curvature(geom, xt);
      const double pot = c.hbar * c.hbar / (2.0 * c.mass) * (c.xi - 1.0 / 3.0) * R +
                         c.V0(xt);
      const Complex pot_phase = std::exp(Complex(0, -1) * eps / c.hbar * pot);
      per_delta[q].push_back(pref2 * hh * acc * pot_phase);
    }
  }

  std::vector<Complex> out(targets.size());
  for (size_t i = 0; i < targets.size(); ++i)
    out[i] = richardson3(per_delta[0][i], per_delta[1][i], per_delta[2][i]);
  return out;
}

double gaussian_moment_residual_impl(const TubeGeometry& geom,
                                     const PhysicsConstants& c, double x0,
                                     double eps, const RegulatorSchedule& reg) {
  if (eps <= 0.0) throw std::invalid_argument("gaussian_moment_residual: eps <= 0");
  const double deltas[3] = {reg.d0, reg.d1, reg.d2};
  Complex rxx[3], rpp[3];

  const double b0 = geom.profile.b(x0);
  const double db0 = geom.profile.db(x0);
  const double d2b0 = geom.profile.d2b(x0);
  const double c1 = b0 * d2b0 / 6.0;
  const double c2 = b0 * b0 * db0 * db0 / 12.0;

  for (int q = 0; q < 3; ++q) {
    const double delta = deltas[q];
    const Complex eps_c = eps * Complex(1.0, -delta);
    const Complex a = Complex(0, 1) * c.mass / (2.0 * c.hbar * eps_c);
    const Complex pref2 = c.mass / (2.0 * kPi * c.hbar * Complex(0, 1) * eps_c);
    const Complex moment = Complex(0, 1) * c.hbar * eps / c.mass;  // real eps here

    Window wx = kinetic_window(c.mass, c.hbar, eps, delta, 1.0);
    if (c1 > 0.0) {
      const double cap = 0.85 * std::sqrt(b0 * b0 / (2.0 * c1));
      if (cap < wx.half_width) {
        wx.half_width = cap;
        wx.n = static_cast<int>(std::ceil(kPtsPerWave * c.mass * cap * cap /
                                          (kPi * c.hbar * eps))) | 1;
        wx.n = std::max(wx.n, 33);
      }
    }
    const double hx = 2.0 * wx.half_width / (wx.n - 1);

    double bbar_lo = 1e300, bbar_hi = 0.0;
    for (int i = 0; i < wx.n; ++i) {
      const double x = x0 - wx.half_width + hx * i;
      const double dx = x - x0;
      const double U = geom.profile.b(x) * b0 - c1 * dx * dx;
      bbar_lo = std::min(bbar_lo, U);
      bbar_hi = std::max(bbar_hi, std::abs(U));
    }
    bbar_lo = std::max(bbar_lo, 0.15 * b0 * b0);
    double Lp = std::sqrt(2.0 * kLambda * c.hbar * eps * (1 + delta * delta) /
                          (c.mass * delta * bbar_lo));
    if (c2 > 0.0) Lp = std::min(Lp, 0.85 * std::sqrt(bbar_lo / (2.0 * c2)));
    int np = static_cast<int>(std::ceil(kPtsPerWave * c.mass * bbar_hi * Lp * Lp /
                                        (2.0 * kPi * c.hbar * eps))) | 1;
    np = std::max(np, 65);
    const double hp = Lp / (np - 1);

    Complex sxx(0, 0), spp(0, 0);
    for (int i = 0; i < wx.n; ++i) {
      const double x = x0 - wx.half_width + hx * i;
      const double dx = x - x0;
      const double bx = geom.profile.b(x);
      const double dbx = geom.profile.db(x);
      const double U = bx * b0 - c1 * dx * dx;  // effective dphi^2 coefficient
      const Complex col = std::exp(a * dx * dx) *
                          ((i == 0 || i == wx.n - 1) ? 0.5 : 1.0);
      Complex axx(0, 0), app(0, 0);
      for (int j = 0; j < np; ++j) {
        const double p = hp * j;
        const double p2 = p * p;
        double wt = (j == 0 || j == np - 1) ? 1.0 : 2.0;  // folded even trapezoid
        const Complex ph = std::exp(a * (U * p2 - c2 * p2 * p2));
        const double dsdx = dx + 0.5 * dbx * b0 * p2 - c1 * dx * p2;
        const double dsdp = U * p - 2.0 * c2 * p * p2;  // d sigma / d dphi
        axx += wt * ph * (Complex(dsdx * dsdx) - moment);
        app += wt * ph * (Complex(dsdp * dsdp / (bx * bx * bx * bx)) -
                          moment / (bx * bx));
      }
      sxx += col * bx * axx;
      spp += col * bx * app;
    }
    rxx[q] = pref2 * hx * hp * sxx;
    rpp[q] = pref2 * hx * hp * spp;
  }

  const Complex exx = richardson3(rxx[0], rxx[1], rxx[2]);
  const Complex epp = richardson3(rpp[0], rpp[1], rpp[2]);
  return std::max(std::abs(exx), std::abs(epp));
}

}  // namespace qtube

double qtube::gaussian_moment_residual(const TubeGeometry& geom,
                                       const PhysicsConstants& c, double x,
                                       double eps) {
  return gaussian_moment_residual_impl(geom, c, x, eps, RegulatorSchedule{});
}
