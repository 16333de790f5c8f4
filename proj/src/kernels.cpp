/* Pointwise physics formulas: effective potentials in both forms, capacity,
 * short-time propagators (full and mode-resolved, with time/history
 * compensation), discrete actions, and the history measure factor.
 */
#include "qtube/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace qtube {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

Potential Potential::zero() { return Potential(); }

Potential Potential::harmonic(double m_omega_sq, double center) {
  Potential p;
  p.kind_ = Kind::harmonic;
  p.m_omega_sq_ = m_omega_sq;
  p.center_ = center;
  return p;
}

Potential Potential::poly(std::vector<double> coeffs) {
  Potential p;
  p.kind_ = Kind::poly;
  p.coeffs_ = std::move(coeffs);
  return p;
}

double Potential::operator()(double x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::harmonic: {
      const double u = x - center_;
      return 0.5 * m_omega_sq_ * u * u;
    }
    case Kind::poly: {
      double v = 0.0;
      for (size_t i = coeffs_.size(); i-- > 0;) v = v * x + coeffs_[i];
      return v;
    }
  }
  return 0.0;
}

double Potential::derivative(double x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::harmonic:
      return m_omega_sq_ * (x - center_);
    case Kind::poly: {
      double v = 0.0;
      for (size_t i = coeffs_.size(); i-- > 1;) v = v * x + coeffs_[i] * double(i);
      return v;
    }
  }
  return 0.0;
}

double capacity_S(const TubeGeometry& geom, double x, double cell_scale, int d,
                  double eta) {
  if (cell_scale <= 0.0) throw std::invalid_argument("capacity_S: cell scale <= 0");
  return d * std::log(geom.profile.b(x, eta)) - d * std::log(cell_scale);
}

double delta_v_eff_from_derivs(double b, double db, double d2b,
                               const PhysicsConstants& c, int d) {
  const double r1 = db / b;
  const double r2 = d2b / b;
  const double coef = c.hbar * c.hbar * d / (2.0 * c.mass);
  return coef * (((d - 2) / 4.0 + c.xi * (1 - d)) * r1 * r1 +
                 0.5 * (1.0 - 4.0 * c.xi) * r2);
}

double delta_v_eff_from_b(const TubeGeometry& geom, const PhysicsConstants& c,
                          double x, int d, double eta) {
  return delta_v_eff_from_derivs(geom.profile.b(x, eta), geom.profile.db(x, eta),
                                 geom.profile.d2b(x, eta), c, d);
}

double delta_v_eff_from_S(const std::function<double(double)>& S,
                          const PhysicsConstants& c, double x, int d,
                          const std::function<double(double)>* dS,
                          const std::function<double(double)>* d2S, double fd_step) {
  double s1, s2;
  if (dS && d2S) {
    s1 = (*dS)(x);
    s2 = (*d2S)(x);
  } else {
    const double h = fd_step;
    s1 = (S(x + h) - S(x - h)) / (2.0 * h);
    s2 = (S(x + h) - 2.0 * S(x) + S(x - h)) / (h * h);
  }
  const double coef = c.hbar * c.hbar / (8.0 * c.mass);
  return coef * ((1.0 - 4.0 * c.xi * (d + 1.0) / d) * s1 * s1 +
                 2.0 * (1.0 - 4.0 * c.xi) * s2);
}

EffectivePotentialTerms effective_potential_terms(const TubeGeometry& geom,
                                                  const PhysicsConstants& c,
                                                  double x, double E_phi,
                                                  double eta) {
  EffectivePotentialTerms t;
  t.x = x;
  t.E_phi = E_phi;
  const double b = geom.profile.b(x, eta);
  t.V_cl = c.V0(x) + E_phi / (b * b);
  t.delta_V = delta_v_eff_from_b(geom, c, x, geom.d, eta);
  return t;
}

double classical_effective_potential(const TubeGeometry& geom,
                                     const PhysicsConstants& c, double x,
                                     double E_phi, double eta) {
  const double b = geom.profile.b(x, eta);
  return c.V0(x) + E_phi / (b * b);
}

double effective_force_gradient(const TubeGeometry& geom, const PhysicsConstants& c,
                                double x, double E_phi, bool include_delta_v,
                                double eta, double fd_step) {
  const double b = geom.profile.b(x, eta);
  const double db = geom.profile.db(x, eta);
  double g = c.V0.derivative(x) - 2.0 * E_phi * db / (b * b * b);
  if (include_delta_v) {
    const double h = fd_step;
    g += (delta_v_eff_from_b(geom, c, x + h, geom.d, eta) -
          delta_v_eff_from_b(geom, c, x - h, geom.d, eta)) /
         (2.0 * h);
  }
  return g;
}

Complex short_time_full(const TubeGeometry& geom, const PhysicsConstants& c,
                        double x_later, double x_earlier, double dphi, double eps,
                        const StepContext& ctx, const WindingOptions& wopt) {
  if (eps <= 0.0) throw std::invalid_argument("short_time_full: eps <= 0");
  const int D = geom.d + 1;
  const Complex i_unit(0.0, 1.0);
  const Complex pref = std::pow(std::sqrt(c.mass / (2.0 * kPi * c.hbar * eps) *
                                          Complex(0.0, -1.0)),
                                D);

  const double R = scalar_curvature(geom, x_later, ctx.eta_curr);
  const double pot = c.hbar * c.hbar / (2.0 * c.mass) * (c.xi - 1.0 / 3.0) * R +
                     c.V0(x_later);
  // -(i eps/hbar)(-i hbar d / 2) dt ln b = -(eps d / 2) f d_eta ln b : real factor
  const double comp = std::exp(-0.5 * eps * geom.d * ctx.f_later *
                               geom.profile.deta_ln_b(ctx.eta_curr));

  const double dphi_red = reduce_angle(dphi);
  // multiplicative history couplings rescale the fibre angle of the base metric
  const double scale = geom.profile.history_scale(ctx.eta_prev);

  const double u_hold = (2.0 * wopt.w_max - 1.0) * kPi;
  const double u_stop = (2.0 * wopt.w_max + 1.0) * kPi;
  // with the taper, include every image inside the stop radius so the sum is
  // independent of the chosen angle representative
  const int w_lo = wopt.taper
                       ? static_cast<int>(std::ceil((-u_stop - dphi_red) / (2 * kPi)))
                       : -wopt.w_max;
  const int w_hi = wopt.taper
                       ? static_cast<int>(std::floor((u_stop - dphi_red) / (2 * kPi)))
                       : wopt.w_max;

  Complex wsum(0.0, 0.0);
  for (int w = w_lo; w <= w_hi; ++w) {
    const double u_eff = dphi_red + 2.0 * kPi * w;
    double weight = 1.0;
    if (wopt.taper && std::abs(u_eff) > u_hold) {
      if (std::abs(u_eff) >= u_stop) continue;
      const double t = (std::abs(u_eff) - u_hold) / (u_stop - u_hold);
      const double cs = std::cos(0.5 * kPi * t);
      weight = cs * cs;
    }
    double sigma;
    if (wopt.sigma_table) {
      sigma = wopt.sigma_table->sigma(x_earlier, x_later, scale * u_eff);
    } else {
      WorldPointPair p{x_earlier, x_later, dphi_red, w};
      sigma = world_function_taylor(geom, p, ctx.eta_prev);
    }
    wsum += weight * std::exp(i_unit * (c.mass * sigma / (c.hbar * eps)));
  }
  return pref * wsum * std::exp(-i_unit * eps / c.hbar * pot) * comp;
}

Complex short_time_mode(const TubeGeometry& geom, const PhysicsConstants& c, int k,
                        double x_later, double x_earlier, double eps,
                        const StepContext& ctx) {
  if (eps <= 0.0) throw std::invalid_argument("short_time_mode: eps <= 0");
  const Complex i_unit(0.0, 1.0);
  const Complex pref =
      std::sqrt(c.mass / (2.0 * kPi * c.hbar * eps) * Complex(0.0, -1.0));
  const double dx = x_later - x_earlier;
  const double b = geom.profile.b(x_later, ctx.eta_curr);
  const double Ek_term = (c.hbar * k) * (c.hbar * k) / (2.0 * c.mass * b * b);
  const double dv = delta_v_eff_from_b(geom, c, x_later, geom.d, ctx.eta_curr);
  const double phase = eps / c.hbar *
                       (c.mass * dx * dx / (2.0 * eps * eps) -
                        (c.V0(x_later) + Ek_term + dv));
  return pref * std::exp(i_unit * phase);
}

double semiclassical_action(const DiscretePath& path, const TubeGeometry& geom,
                            const PhysicsConstants& c, double E_phi,
                            bool include_delta_v,
                            const std::function<double(double)>* f) {
  if (path.x.size() < 2) throw std::invalid_argument("semiclassical_action: N < 1");
  if (path.eps <= 0.0) throw std::invalid_argument("semiclassical_action: eps <= 0");
  const double eps = path.eps;
  double action = 0.0;
  double eta = 0.0;
  for (size_t n = 1; n < path.x.size(); ++n) {
    if (f) eta += eps * (*f)(path.x[n]);
    const double v = (path.x[n] - path.x[n - 1]) / eps;
    double V = classical_effective_potential(geom, c, path.x[n], E_phi, eta);
    if (include_delta_v) V += delta_v_eff_from_b(geom, c, path.x[n], geom.d, eta);
    action += eps * (0.5 * c.mass * v * v - V);
  }
  return action;
}

double history_measure_factor(const TubeGeometry& geom, double x, double eta,
                              double eps, double f_value, int d) {
  const double num = geom.profile.b(x, eta);
  const double den = geom.profile.b(x, eta - eps * f_value);
  return std::pow(num / den, 0.5 * d);
}

}  // namespace qtube
