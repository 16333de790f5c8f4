#include "doctest.h"
#include "qtube/kernels.hpp"
#include "qtube/sliced.hpp"

#include <cmath>
#include <stdexcept>
#include <random>

using namespace qtube;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

TubeGeometry tube(RadiusProfile p, int d = 1) {
  return TubeGeometry{std::move(p), d, 2 * kPi, -30.0, 30.0};
}
}  // namespace

TEST_CASE("capacity") {
  PhysicsConstants c;
  CHECK(capacity_S(tube(RadiusProfile::constant(1.0)), 0.3, 1.0, 1) ==
        doctest::Approx(0.0));
  CHECK(capacity_S(tube(RadiusProfile::constant(std::exp(2.0))), 0.0, 1.0, 1) ==
        doctest::Approx(2.0));
  CHECK(capacity_S(tube(RadiusProfile::constant(std::exp(1.0)), 3), 0.0, 1.0, 3) ==
        doctest::Approx(3.0));
  CHECK_THROWS_AS(capacity_S(tube(RadiusProfile::constant(1.0)), 0.0, -1.0, 1),
                  std::invalid_argument);
}

TEST_CASE("quantum correction, b-form") {
  PhysicsConstants c;  // m = hbar = 1, xi = 0
  auto g = tube(RadiusProfile::exponential(1.0));
  CHECK(delta_v_eff_from_b(g, c, 0.0, 1) == doctest::Approx(0.125).epsilon(1e-14));
  c.xi = 0.25;
  CHECK(delta_v_eff_from_b(g, c, 0.0, 1) == doctest::Approx(-0.125).epsilon(1e-14));
  for (double xi : {-0.5, 0.0, 1.0 / 6, 0.25, 1.0 / 3})
    for (int d : {1, 2, 3}) {
      c.xi = xi;
      CHECK(delta_v_eff_from_b(tube(RadiusProfile::constant(1.7), d), c, 0.4, d) ==
            doctest::Approx(0.0));
    }
}

TEST_CASE("quantum correction, S-form") {
  PhysicsConstants c;
  auto Sconst = [](double) { return 3.7; };
  CHECK(delta_v_eff_from_S(Sconst, c, 0.2, 1) == doctest::Approx(0.0).scale(1.0));
  auto Slin = [](double x) { return x; };
  CHECK(delta_v_eff_from_S(Slin, c, 0.0, 1) == doctest::Approx(0.125).epsilon(1e-9));
  c.xi = 0.125;
  CHECK(delta_v_eff_from_S(Slin, c, 0.0, 1) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("S-form equals b-form for every profile, xi, d and cell scale") {
  std::vector<RadiusProfile> profiles = {
      RadiusProfile::constant(1.3), RadiusProfile::exponential(0.4),
      RadiusProfile::tanh_step(1.0, 0.2), RadiusProfile::tanh_step(1.0, 0.0, 1.0, 0.3),
      RadiusProfile::gaussian_bump(1.0, 0.3, 0.9)};
  PhysicsConstants c;
  for (auto& p : profiles)
    for (double xi : {-0.5, 0.0, 1.0 / 6, 0.25, 1.0 / 3})
      for (int d : {1, 2, 3})
        for (double ell : {0.1, 1.0, 10.0})
          for (int i = 0; i <= 10; ++i) {
            const double x = -2.0 + 0.4 * i;
            c.xi = xi;
            auto g = tube(p, d);
            auto S = [&](double y) { return capacity_S(g, y, ell, d); };
            auto dS = std::function<double(double)>([&](double y) {
              return d * g.profile.db(y) / g.profile.b(y);
            });
            auto d2S = std::function<double(double)>([&](double y) {
              const double b = g.profile.b(y), b1 = g.profile.db(y),
                           b2 = g.profile.d2b(y);
              return d * (b2 / b - b1 * b1 / (b * b));
            });
            const double vs = delta_v_eff_from_S(S, c, x, d, &dS, &d2S);
            const double vb = delta_v_eff_from_b(g, c, x, d);
            CHECK(vs == doctest::Approx(vb).epsilon(1e-12).scale(1.0));
          }
}

TEST_CASE("xi = 1/4 removes all second-derivative dependence") {
  PhysicsConstants c;
  c.xi = 0.25;
  const double v0 = delta_v_eff_from_derivs(1.2, 0.3, 0.7, c, 1);
  const double v1 = delta_v_eff_from_derivs(1.2, 0.3, 0.7 + 5.0, c, 1);
  CHECK(v0 == doctest::Approx(v1).epsilon(1e-12));
}

TEST_CASE("classical effective potential") {
  PhysicsConstants c;
  auto g1 = tube(RadiusProfile::constant(1.0));
  CHECK(classical_effective_potential(g1, c, 0.1, 0.0) == doctest::Approx(0.0));
  auto g2 = tube(RadiusProfile::constant(2.0));
  CHECK(classical_effective_potential(g2, c, 0.0, 4.5) == doctest::Approx(1.125));
  c.V0 = Potential::harmonic(1.0);
  CHECK(classical_effective_potential(g1, c, 2.0, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("full short-time kernel: flat limits") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::constant(1.0));
  const double eps = 0.05;
  const Complex pref2 = c.mass / (2 * kPi * c.hbar * eps) * Complex(0, -1);
  // coincident, single winding
  CHECK(std::abs(short_time_full(g, c, 0.0, 0.0, 0.0, eps, {}, WindingOptions{0}) - pref2) < 1e-14);
  // free 2D kernel with winding images
  const double dx = 0.2, dp = 0.5;
  Complex expect(0, 0);
  for (int w = -2; w <= 2; ++w) {
    const double a = dp + 2 * kPi * w;
    expect += std::exp(Complex(0, 1) * (dx * dx + a * a) / (2 * c.hbar * eps));
  }
  expect *= pref2;
  CHECK(std::abs(short_time_full(g, c, 0.2, 0.0, 0.5, eps) - expect) < 1e-12);
}

TEST_CASE("mode short-time kernel values") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::constant(1.0));
  const double eps = 0.03;
  const Complex pref = std::sqrt(c.mass / (2 * kPi * c.hbar * eps) * Complex(0, -1));
  CHECK(std::abs(short_time_mode(g, c, 0, 0.0, 0.0, eps) - pref) < 1e-14);
  // k = 2: free kernel times e^{-2 i eps}
  const Complex k2 = short_time_mode(g, c, 2, 0.0, 0.0, eps);
  CHECK(std::abs(k2 - pref * std::exp(Complex(0, -2 * eps))) < 1e-14);
  // delta_V enters the phase: b = e^{0.1 x}, xi = 0, k = 0 at x = 0
  auto ge = tube(RadiusProfile::exponential(0.1));
  const Complex kd = short_time_mode(ge, c, 0, 0.0, 0.0, eps);
  const double dv = 0.00125;  // hand value of delta_V_eff
  CHECK(std::abs(kd - pref * std::exp(Complex(0, -eps * dv))) < 1e-13);
}

TEST_CASE("semiclassical action") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::constant(1.0));
  DiscretePath rest{0.1, std::vector<double>(11, 0.0), {}};
  CHECK(semiclassical_action(rest, g, c, 0.0) == doctest::Approx(0.0));

  DiscretePath moving{0.1, {}, {}};
  const double v = 0.7;
  for (int n = 0; n <= 10; ++n) moving.x.push_back(v * 0.1 * n);
  CHECK(semiclassical_action(moving, g, c, 0.0) ==
        doctest::Approx(0.5 * v * v * 1.0).epsilon(1e-12));

  // constant path on b = e^{lambda x} at x = 0
  const double lam = 0.4, E = 0.8, T = 1.0;
  PhysicsConstants cx;
  cx.xi = 0.1;
  auto ge = tube(RadiusProfile::exponential(lam));
  DiscretePath still{0.1, std::vector<double>(11, 0.0), {}};
  const double expected = -T * (E + lam * lam * (1 - 8 * cx.xi) / 8.0);
  CHECK(semiclassical_action(still, ge, cx, E) ==
        doctest::Approx(expected).epsilon(1e-12));

  DiscretePath tooShort{0.1, {0.0}, {}};
  CHECK_THROWS_AS(semiclassical_action(tooShort, g, c, 0.0), std::invalid_argument);
}

TEST_CASE("action is invariant under time reversal for static potentials") {
  PhysicsConstants c;
  c.V0 = Potential::poly({0.0, 0.3, 0.5});
  auto g = tube(RadiusProfile::tanh_step(1.0, 0.2));
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DiscretePath p{0.05, {}, {}};
  for (int n = 0; n <= 20; ++n) p.x.push_back(u(rng));
  DiscretePath r = p;
  // reversal keeps endpoints sampled at the same potential points only if the
  // interior sequence is reversed including both ends
  std::reverse(r.x.begin(), r.x.end());
  // potential terms are evaluated at x_1..x_N; kinetic terms are symmetric.
  // For a closed comparison evaluate both orientations of a loop.
  p.x.push_back(p.x.front());
  r = p;
  std::reverse(r.x.begin(), r.x.end());
  CHECK(semiclassical_action(p, g, c, 0.5) ==
        doctest::Approx(semiclassical_action(r, g, c, 0.5)).epsilon(1e-12));
}

TEST_CASE("history measure factor") {
  auto g0 = tube(RadiusProfile::tanh_step(1.0, 0.1));
  CHECK(history_measure_factor(g0, 0.3, 0.5, 0.01, 2.0, 1) == doctest::Approx(1.0));

  auto g = tube(RadiusProfile::constant(1.0).with_history(0.3));
  CHECK(history_measure_factor(g, 0.0, 1.0, 0.01, 2.0, 1) ==
        doctest::Approx(std::exp(0.003)).epsilon(1e-12));

  // linear-in-eta coupling: factor cancels exp{(d/2) eps f d_eta ln b} exactly
  const double dev_linear = history_measure_factor(g, 0.0, 0.7, 0.02, 1.3, 1) *
                                std::exp(-0.5 * 0.02 * 1.3 * 0.3) -
                            1.0;
  CHECK(std::abs(dev_linear) < 1e-14);

  // quadratic coupling: deviation is O(eps^2); fitted slope >= 1.8
  auto gq = tube(RadiusProfile::constant(1.0).with_history(0.2, 0.3));
  std::vector<std::pair<double, double>> pts;
  for (double eps : {0.02, 0.01, 0.005, 0.0025}) {
    const double f = 1.3, eta = 0.7;
    const double dev = history_measure_factor(gq, 0.0, eta, eps, f, 1) *
                           std::exp(-0.5 * eps * f * gq.profile.deta_ln_b(eta)) -
                       1.0;
    pts.push_back({eps, std::abs(dev)});
  }
  CHECK(fit_convergence_order(pts) >= 1.8);
}

TEST_CASE("semiclassical action with a history accumulator") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::constant(1.0).with_history(0.3));
  // constant path at x = 2, f(x) = x: eta_n = 2 n eps, V_cl = E e^{-2 mu eta}
  const double E = 0.7, eps = 0.1;
  const int N = 10;
  DiscretePath p{eps, std::vector<double>(N + 1, 2.0), {}};
  std::function<double(double)> f = [](double x) { return x; };
  double expect = 0.0;
  for (int n = 1; n <= N; ++n) {
    const double eta = 2.0 * n * eps;
    expect -= eps * E * std::exp(-2.0 * 0.3 * eta);
  }
  CHECK(semiclassical_action(p, g, c, E, true, &f) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("effective potential terms reproduce V_cl from parts") {
  PhysicsConstants c;
  c.V0 = Potential::poly({0.2, 0.0, 0.5});
  auto g = tube(RadiusProfile::tanh_step(1.0, 0.2));
  const auto t = effective_potential_terms(g, c, 0.7, 1.4);
  const double b = g.profile.b(0.7);
  CHECK(t.V_cl == doctest::Approx(c.V0(0.7) + t.E_phi / (b * b)).epsilon(1e-14));
  CHECK(t.delta_V == doctest::Approx(delta_v_eff_from_b(g, c, 0.7, 1)));
}
