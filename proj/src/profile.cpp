#include "qtube/profile.hpp"

#include <cmath>
#include <stdexcept>

namespace qtube {

ProfileKind profile_kind_from_string(const std::string& s) {
  if (s == "constant" || s == "const") return ProfileKind::constant;
  if (s == "exponential" || s == "exp") return ProfileKind::exponential;
  if (s == "tanh_step" || s == "tanh-step" || s == "tanh") return ProfileKind::tanh_step;
  if (s == "gaussian_bump" || s == "gaussian-bump" || s == "bump")
    return ProfileKind::gaussian_bump;
  throw std::invalid_argument("unknown profile kind: " + s);
}

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::exponential: return "exponential";
    case ProfileKind::tanh_step: return "tanh_step";
    case ProfileKind::gaussian_bump: return "gaussian_bump";
  }
  return "?";
}

namespace {
double get_or(const std::map<std::string, double>& m, const std::string& key,
              double fallback) {
  auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}
}  // namespace

RadiusProfile::RadiusProfile(ProfileKind kind, std::map<std::string, double> params,
                             double history_mu, double history_nu)
    : kind_(kind), params_(std::move(params)), mu_(history_mu), nu_(history_nu) {
  // Positivity is checked lazily at evaluation sites that know the domain;
  // a constant or exponential profile must be positive outright.
  if (kind_ == ProfileKind::constant && get_or(params_, "b0", 1.0) <= 0.0)
    throw std::invalid_argument("constant profile requires b0 > 0");
  if (kind_ == ProfileKind::exponential && get_or(params_, "b0", 1.0) <= 0.0)
    throw std::invalid_argument("exponential profile requires b0 > 0");
}

RadiusProfile RadiusProfile::constant(double b0) {
  return RadiusProfile(ProfileKind::constant, {{"b0", b0}});
}
RadiusProfile RadiusProfile::exponential(double lambda, double b0) {
  return RadiusProfile(ProfileKind::exponential, {{"lambda", lambda}, {"b0", b0}});
}
RadiusProfile RadiusProfile::tanh_step(double base, double amp, double width,
                                       double log_amp) {
  return RadiusProfile(ProfileKind::tanh_step,
                       {{"base", base}, {"amp", amp}, {"width", width},
                        {"log_amp", log_amp}});
}
RadiusProfile RadiusProfile::gaussian_bump(double base, double amp, double width) {
  return RadiusProfile(ProfileKind::gaussian_bump,
                       {{"base", base}, {"amp", amp}, {"width", width}});
}

RadiusProfile RadiusProfile::with_history(double mu, double nu) const {
  RadiusProfile p = *this;
  p.mu_ = mu;
  p.nu_ = nu;
  return p;
}

double RadiusProfile::eta_factor(double eta) const {
  if (mu_ == 0.0 && nu_ == 0.0) return 1.0;
  return std::exp(mu_ * eta + nu_ * eta * eta);
}

double RadiusProfile::deta_ln_b(double eta) const { return mu_ + 2.0 * nu_ * eta; }

double RadiusProfile::base_b(double x) const {
  switch (kind_) {
    case ProfileKind::constant:
      return get_or(params_, "b0", 1.0);
    case ProfileKind::exponential:
      return get_or(params_, "b0", 1.0) * std::exp(get_or(params_, "lambda", 1.0) * x);
    case ProfileKind::tanh_step: {
      const double base = get_or(params_, "base", 1.0);
      const double amp = get_or(params_, "amp", 0.0);
      const double w = get_or(params_, "width", 1.0);
      const double la = get_or(params_, "log_amp", 0.0);
      const double u = std::tanh(x / w);
      return (base + amp * u) * std::exp(la * u);
    }
    case ProfileKind::gaussian_bump: {
      const double base = get_or(params_, "base", 1.0);
      const double amp = get_or(params_, "amp", 0.0);
      const double w = get_or(params_, "width", 1.0);
      return base + amp * std::exp(-x * x / (2.0 * w * w));
    }
  }
  return 1.0;
}

double RadiusProfile::base_db(double x) const {
  switch (kind_) {
    case ProfileKind::constant:
      return 0.0;
    case ProfileKind::exponential:
      return get_or(params_, "lambda", 1.0) * base_b(x);
    case ProfileKind::tanh_step: {
      const double base = get_or(params_, "base", 1.0);
      const double amp = get_or(params_, "amp", 0.0);
      const double w = get_or(params_, "width", 1.0);
      const double la = get_or(params_, "log_amp", 0.0);
      const double u = std::tanh(x / w);
      const double up = (1.0 - u * u) / w;
      const double P = base + amp * u;
      return up * (amp + la * P) * std::exp(la * u);
    }
    case ProfileKind::gaussian_bump: {
      const double amp = get_or(params_, "amp", 0.0);
      const double w = get_or(params_, "width", 1.0);
      const double g = std::exp(-x * x / (2.0 * w * w));
      return amp * g * (-x / (w * w));
    }
  }
  return 0.0;
}

double RadiusProfile::base_d2b(double x) const {
  switch (kind_) {
    case ProfileKind::constant:
      return 0.0;
    case ProfileKind::exponential: {
      const double l = get_or(params_, "lambda", 1.0);
      return l * l * base_b(x);
    }
    case ProfileKind::tanh_step: {
      const double base = get_or(params_, "base", 1.0);
      const double amp = get_or(params_, "amp", 0.0);
      const double w = get_or(params_, "width", 1.0);
      const double la = get_or(params_, "log_amp", 0.0);
      const double u = std::tanh(x / w);
      const double up = (1.0 - u * u) / w;
      const double upp = -2.0 * u * up / w;
      const double P = base + amp * u;
      return (upp * (amp + la * P) + la * up * up * (2.0 * amp + la * P)) *
             std::exp(la * u);
    }
    case ProfileKind::gaussian_bump: {
      const double amp = get_or(params_, "amp", 0.0);
      const double w = get_or(params_, "width", 1.0);
      const double g = std::exp(-x * x / (2.0 * w * w));
      return amp * g * (x * x / (w * w * w * w) - 1.0 / (w * w));
    }
  }
  return 0.0;
}

double RadiusProfile::b(double x, double eta) const {
  const double v = base_b(x) * eta_factor(eta);
  if (!(v > 0.0))
    throw std::invalid_argument("radius profile not positive at x=" + std::to_string(x));
  return v;
}

double RadiusProfile::db(double x, double eta) const {
  return base_db(x) * eta_factor(eta);
}

double RadiusProfile::d2b(double x, double eta) const {
  return base_d2b(x) * eta_factor(eta);
}

}  // namespace qtube
