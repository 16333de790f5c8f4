#ifndef QTUBE_PROFILE_HPP
#define QTUBE_PROFILE_HPP

#include <map>
#include <string>

namespace qtube {

enum class ProfileKind { constant, exponential, tanh_step, gaussian_bump };

ProfileKind profile_kind_from_string(const std::string& s);
std::string to_string(ProfileKind k);

/// Analytic radius family b(x) with closed-form first and second x-derivatives.
///
/// Shapes:
///   constant       b = b0
///   exponential    b = b0 * exp(lambda*x)
///   tanh_step      b = (base + amp*tanh(x/width)) * exp(log_amp*tanh(x/width))
///   gaussian_bump  b = base + amp*exp(-x^2/(2*width^2))
///
/// An optional history coupling multiplies the whole profile by
/// exp(mu*eta + nu*eta^2), so d/deta ln b = mu + 2*nu*eta. Static use
/// corresponds to eta = 0 (the factor is then 1 when nu-free pipelines
/// set mu = 0 or never pass eta).
class RadiusProfile {
 public:
  RadiusProfile() = default;
  RadiusProfile(ProfileKind kind, std::map<std::string, double> params,
                double history_mu = 0.0, double history_nu = 0.0);

  static RadiusProfile constant(double b0 = 1.0);
  static RadiusProfile exponential(double lambda, double b0 = 1.0);
  static RadiusProfile tanh_step(double base, double amp, double width = 1.0,
                                 double log_amp = 0.0);
  static RadiusProfile gaussian_bump(double base, double amp, double width = 1.0);

  double b(double x, double eta = 0.0) const;
  double db(double x, double eta = 0.0) const;    // d b / d x
  double d2b(double x, double eta = 0.0) const;   // d^2 b / d x^2
  double deta_ln_b(double eta) const;             // d ln b / d eta
  double history_scale(double eta) const { return eta_factor(eta); }
  bool has_history() const { return mu_ != 0.0 || nu_ != 0.0; }
  double history_mu() const { return mu_; }
  double history_nu() const { return nu_; }

  ProfileKind kind() const { return kind_; }
  const std::map<std::string, double>& parameters() const { return params_; }

  RadiusProfile with_history(double mu, double nu = 0.0) const;

 private:
  double base_b(double x) const;
  double base_db(double x) const;
  double base_d2b(double x) const;
  double eta_factor(double eta) const;

  ProfileKind kind_ = ProfileKind::constant;
  std::map<std::string, double> params_{{"b0", 1.0}};
  double mu_ = 0.0;
  double nu_ = 0.0;
};

}  // namespace qtube

#endif
