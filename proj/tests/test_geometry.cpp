#include "doctest.h"
#include "qtube/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace qtube;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

TubeGeometry flat_tube(double b0 = 1.0) {
  return TubeGeometry{RadiusProfile::constant(b0), 1, 2 * kPi, -20.0, 20.0};
}
TubeGeometry exp_tube(double lambda = 1.0) {
  return TubeGeometry{RadiusProfile::exponential(lambda), 1, 2 * kPi, -20.0, 20.0};
}
TubeGeometry tanh_tube() {
  return TubeGeometry{RadiusProfile::tanh_step(1.0, 0.2), 1, 2 * kPi, -20.0, 20.0};
}
}  // namespace

TEST_CASE("scalar curvature") {
  CHECK(scalar_curvature(flat_tube(), 0.7) == doctest::Approx(0.0));
  CHECK(scalar_curvature(exp_tube(1.0), 0.0) == doctest::Approx(-2.0));
  CHECK(scalar_curvature(exp_tube(0.5), 1.3) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(scalar_curvature(flat_tube(), 100.0), std::invalid_argument);
}

TEST_CASE("world function Taylor values") {
  // flat: 2 sigma = dx^2 + dphi^2
  CHECK(world_function_taylor(flat_tube(), {0.0, 0.3, 0.4, 0}) ==
        doctest::Approx(0.125).epsilon(1e-14));
  CHECK(world_function_taylor(tanh_tube(), {0.5, 0.5, 0.0, 0}) == doctest::Approx(0.0));
  // b = e^x at the origin: 2 sigma = 0.01 - 1e-4/12
  CHECK(world_function_taylor(exp_tube(), {0.0, 0.0, 0.1, 0}) ==
        doctest::Approx((0.01 - 1e-4 / 12.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("geodesic world function: flat and degenerate cases") {
  CHECK(world_function_geodesic(flat_tube(), {0.0, 0.3, 0.4, 0}) ==
        doctest::Approx(0.125).epsilon(1e-9));
  CHECK(world_function_geodesic(tanh_tube(), {0.2, 0.2, 0.0, 0}) == doctest::Approx(0.0));
  // pure x displacement is exact for any profile
  CHECK(world_function_geodesic(tanh_tube(), {-0.4, 0.9, 0.0, 0}) ==
        doctest::Approx(0.5 * 1.3 * 1.3).epsilon(1e-12));
}

TEST_CASE("geodesic oracle validates the Taylor expansion") {
  const TubeGeometry g = exp_tube();
  const double st = world_function_taylor(g, {0.0, 0.0, 0.1, 0});
  const double sb = world_function_geodesic(g, {0.0, 0.0, 0.1, 0});
  CHECK(std::abs(st - sb) < 2e-6);  // O(sigma^{5/2}) at sigma ~ 5e-3
}

TEST_CASE("sigma symmetry under argument exchange") {
  const TubeGeometry g = tanh_tube();
  for (auto [x, xp, dp] : std::vector<std::tuple<double, double, double>>{
           {0.1, 0.4, 0.3}, {-0.5, 0.2, -0.6}, {0.0, 0.05, 0.9}}) {
    const double a = world_function_geodesic(g, {x, xp, dp, 0});
    const double b = world_function_geodesic(g, {xp, x, -dp, 0});
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
    // the symmetrized Taylor evaluator is exactly exchange-symmetric
    const double at = world_function_taylor(g, {x, xp, dp, 0});
    const double bt = world_function_taylor(g, {xp, x, -dp, 0});
    CHECK(at == doctest::Approx(bt).epsilon(1e-12));
  }
}

TEST_CASE("Taylor-vs-geodesic error shrinks at order sigma^{5/2}") {
  const TubeGeometry g = tanh_tube();
  std::vector<std::pair<double, double>> pts;  // (sigma, |difference|)
  for (double s : {1.0, 0.7, 0.5, 0.35, 0.25}) {
    WorldPointPair p{0.3, 0.3 + 0.4 * s, 0.5 * s, 0};
    const double st = world_function_taylor(g, p);
    const double sb = world_function_geodesic(g, p);
    pts.push_back({sb, std::abs(st - sb)});
  }
  // least-squares slope of log|diff| vs log(sigma)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [h, e] : pts) {
    sx += std::log(h);
    sy += std::log(e);
    sxx += std::log(h) * std::log(h);
    sxy += std::log(h) * std::log(e);
  }
  const double n = pts.size();
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope >= 2.3);
}

TEST_CASE("eikonal identity grad(sigma).grad(sigma) = 2 sigma") {
  const TubeGeometry g = tanh_tube();
  const double h = 1e-4;
  for (auto [x, xp, dp] : std::vector<std::tuple<double, double, double>>{
           {0.1, 0.5, 0.4}, {-0.3, 0.2, 0.7}}) {
    auto sig = [&](double a, double b) {
      return world_function_geodesic(g, {x, a, b, 0}, 1e-12);
    };
    const double s0 = sig(xp, dp);
    const double dsdx = (sig(xp + h, dp) - sig(xp - h, dp)) / (2 * h);
    const double dsdp = (sig(xp, dp + h) - sig(xp, dp - h)) / (2 * h);
    const double bq = g.profile.b(xp);
    const double lhs = dsdx * dsdx + dsdp * dsdp / (bq * bq);
    CHECK(lhs == doctest::Approx(2 * s0).epsilon(1e-5));
  }
}

TEST_CASE("winding minimization") {
  auto [s1, w1] = min_winding_sigma(flat_tube(), 0.0, 0.0, 1.9 * kPi);
  CHECK(w1 == -1);
  CHECK(s1 == doctest::Approx(0.5 * (0.1 * kPi) * (0.1 * kPi)).epsilon(1e-8));

  auto [s2, w2] = min_winding_sigma(flat_tube(), 0.0, 0.6, 0.0);
  CHECK(w2 == 0);
  CHECK(s2 == doctest::Approx(0.18).epsilon(1e-10));

  auto [s3, w3] = min_winding_sigma(flat_tube(2.0), 0.0, 0.0, kPi);
  CHECK(w3 == 0);  // tie at |dphi| = pi broken toward zero winding
  CHECK(s3 == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-8));
}

TEST_CASE("geodesics leaving the domain fail loudly") {
  TubeGeometry g = exp_tube(1.0);
  g.x_min = -0.2;
  g.x_max = 0.2;
  // a long fibre hop must swing through large |x| to shorten, or hit the wall
  CHECK_THROWS_AS(world_function_geodesic(g, {-0.15, 0.15, 5.5, 0}),
                  std::runtime_error);
}

TEST_CASE("angle reduction") {
  CHECK(reduce_angle(1.9 * kPi) == doctest::Approx(-0.1 * kPi));
  CHECK(reduce_angle(kPi) == doctest::Approx(-kPi));
  CHECK(reduce_angle(-kPi) == doctest::Approx(-kPi));
  CHECK(reduce_angle(0.3) == doctest::Approx(0.3));
}
