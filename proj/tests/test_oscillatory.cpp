#include "doctest.h"
#include "qtube/oscillatory.hpp"
#include "qtube/pde.hpp"

#include <cmath>

using namespace qtube;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

TubeGeometry tube(RadiusProfile p) {
  return TubeGeometry{std::move(p), 1, 2 * kPi, -1e9, 1e9};
}

Complex free_gaussian(double x, double t, double sigma, double x0, double p0) {
  const Complex A(sigma * sigma, t);
  const double xc = x0 + p0 * t;
  return std::pow(sigma * sigma / kPi, 0.25) / std::sqrt(A) *
         std::exp(-(x - xc) * (x - xc) / (2.0 * A) +
                  Complex(0, p0 * (x - x0) - p0 * p0 * t / 2));
}
}  // namespace

TEST_CASE("three-point Richardson removes linear and quadratic regulator terms") {
  auto y = [](double d) { return Complex(2.0 + 3.0 * d - 1.7 * d * d, -d); };
  const Complex r = richardson3(y(0.05), y(0.025), y(0.0125));
  CHECK(std::abs(r - Complex(2.0, 0.0)) < 1e-12);
}

TEST_CASE("flat Gaussian-moment residual vanishes after extrapolation") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::constant(1.0));
  CHECK(gaussian_moment_residual(g, c, 0.0, 0.01) < 1e-8);
}

TEST_CASE("curved Gaussian-moment residual scales like eps^{3/2}") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::tanh_step(1.0, 0.1));
  const double r1 = gaussian_moment_residual(g, c, 0.3, 0.02);
  const double r2 = gaussian_moment_residual(g, c, 0.3, 0.01);
  CHECK(r1 / r2 >= 2.5);  // halving eps cuts the residual by at least 2.5x
}

TEST_CASE("regulated closed-mode kernel step reproduces free evolution") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::constant(1.0));
  const double eps = 0.02;
  std::vector<double> targets;
  for (int i = -6; i <= 6; ++i) targets.push_back(0.3 * i);
  auto psi0 = [](double x) { return free_gaussian(x, 0.0, 0.9, 0.0, 0.7); };
  auto stepped = kernel_step_mode_closed(g, c, 0, targets, psi0, eps);
  double worst = 0.0;
  for (size_t i = 0; i < targets.size(); ++i)
    worst = std::max(worst,
                     std::abs(stepped[i] - free_gaussian(targets[i], eps, 0.9, 0.0, 0.7)));
  CHECK(worst < 1e-8);
}

TEST_CASE("full-kernel step agrees with the closed-mode step at leading order") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::tanh_step(1.0, 0.1));
  const double eps = 0.02;
  const int k = 1;
  std::vector<double> targets;
  for (int i = -4; i <= 4; ++i) targets.push_back(0.25 * i);

  // u0 = b^{-1/2} psi0 so both routes act on the same physical state
  auto psi0 = [](double x) { return free_gaussian(x, 0.0, 0.9, 0.0, 0.7); };
  auto u0 = [&](double x) { return psi0(x) / std::sqrt(g.profile.b(x)); };

  auto full = kernel_step_mode_full(g, c, k, targets, u0, eps);
  auto closed = kernel_step_mode_closed(g, c, k, targets, psi0, eps);
  for (size_t i = 0; i < targets.size(); ++i) {
    const Complex full_psi = full[i] * std::sqrt(g.profile.b(targets[i]));
    CHECK(std::abs(full_psi - closed[i]) < 5e-3);  // both approximate e^{-i eps H}
  }
}
