#include "doctest.h"
#include "qtube/pde.hpp"

#include <cmath>
#include <stdexcept>

using namespace qtube;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

TubeGeometry tube(RadiusProfile p) {
  return TubeGeometry{std::move(p), 1, 2 * kPi, -1e9, 1e9};
}

WaveField1D gaussian_packet(const Grid1D& g, double sigma, double x0, double p0,
                            double hbar = 1.0) {
  WaveField1D f;
  f.grid = g;
  f.v.resize(g.n);
  const double norm = std::pow(kPi * sigma * sigma, -0.25);
  for (int i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    f.v[i] = norm * std::exp(Complex(-(x - x0) * (x - x0) / (2 * sigma * sigma),
                                     p0 * (x - x0) / hbar));
  }
  return f;
}

// closed-form free evolution of the Gaussian packet
Complex free_gaussian(double x, double t, double sigma, double x0, double p0,
                      double m = 1.0, double hbar = 1.0) {
  const Complex A(sigma * sigma, hbar * t / m);
  const double xc = x0 + p0 * t / m;
  return std::pow(sigma * sigma / kPi, 0.25) / std::sqrt(A) *
         std::exp(-(x - xc) * (x - xc) / (2.0 * A) +
                  Complex(0, p0 * (x - x0) / hbar - p0 * p0 * t / (2 * m * hbar)));
}
}  // namespace

TEST_CASE("free 1D evolution matches the analytic spreading packet") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::constant(1.0));
  const Grid1D grid = make_grid(-12.0, 12.0, 1921);
  WaveField1D psi0 = gaussian_packet(grid, 1.0, -2.0, 1.0);
  const double dt = 0.005;
  const int steps = 200;  // T = 1
  WaveField1D psiT = evolve_reduced_1d(psi0, g, c, 0.0, dt, steps, true);
  double num = 0, den = 0;
  for (int i = 0; i < grid.n; ++i) {
    const Complex ex = free_gaussian(grid.x(i), 1.0, 1.0, -2.0, 1.0);
    num += std::norm(psiT.v[i] - ex);
    den += std::norm(ex);
  }
  CHECK(std::sqrt(num / den) < 1e-4);
}

TEST_CASE("zero field stays zero") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::tanh_step(1.0, 0.2));
  WaveField1D z;
  z.grid = make_grid(-3, 3, 41);
  z.v.assign(41, Complex(0, 0));
  WaveField1D out = evolve_reduced_1d(z, g, c, 0.5, 0.01, 10, true);
  for (auto& v : out.v) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("coherent state in a harmonic well follows x0 cos(wt)") {
  PhysicsConstants c;
  c.V0 = Potential::harmonic(1.0);  // m w^2 = 1 -> w = 1
  auto g = tube(RadiusProfile::constant(1.0));
  const Grid1D grid = make_grid(-10.0, 10.0, 1601);
  // coherent state: ground-state width sigma = sqrt(hbar/(m w)) = 1
  WaveField1D psi = gaussian_packet(grid, 1.0, 1.2, 0.0);
  const double dt = 0.0025;
  for (int s = 1; s <= 400; ++s) {
    psi = evolve_reduced_1d(psi, g, c, 0.0, dt, 1, true);
    if (s % 100 == 0) {
      const double t = dt * s;
      CHECK(std::abs(expectation_x(psi) - 1.2 * std::cos(t)) < 1e-4);
    }
  }
}

TEST_CASE("reduced norm is conserved to machine precision") {
  PhysicsConstants c;
  c.xi = 0.2;
  auto g = tube(RadiusProfile::tanh_step(1.0, 0.3));
  const Grid1D grid = make_grid(-10.0, 10.0, 301);
  WaveField1D psi = gaussian_packet(grid, 0.8, 0.0, 0.6);
  const double n0 = psi.norm_sq();
  psi = evolve_reduced_1d(psi, g, c, 2.0, 0.01, 100, true);
  CHECK(psi.norm_sq() == doctest::Approx(n0).epsilon(1e-10));
}

TEST_CASE("flat 2D evolution: analytic per-mode phases and covariant norm") {
  PhysicsConstants c;
  c.xi = 0.7;  // irrelevant when R = 0
  auto g = tube(RadiusProfile::constant(1.0));
  const Grid1D grid = make_grid(-12.0, 12.0, 961);
  const int nphi = 16, k = 2;

  WaveField1D m0 = gaussian_packet(grid, 1.0, -1.0, 0.5);
  WaveField2D psi = assemble_from_modes({{k, m0}}, g, grid, nphi);
  const double n0 = psi.norm_sq(g);
  const double dt = 0.005, T = 0.5;
  WaveField2D out = evolve_full_2d(psi, g, c, dt, 100);
  CHECK(out.norm_sq(g) == doctest::Approx(n0).epsilon(1e-10));

  WaveField1D pk = project_mode(out, g, k);
  double num = 0, den = 0;
  for (int i = 0; i < grid.n; ++i) {
    const Complex ex = free_gaussian(grid.x(i), T, 1.0, -1.0, 0.5) *
                       std::exp(Complex(0, -0.5 * k * k * T));
    num += std::norm(pk.v[i] - ex);
    den += std::norm(ex);
  }
  CHECK(std::sqrt(num / den) < 1e-4);
}

TEST_CASE("full 2D evolution never leaks between modes") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::tanh_step(1.0, 0.25));
  const Grid1D grid = make_grid(-9.0, 9.0, 161);
  WaveField1D m0 = gaussian_packet(grid, 1.0, 0.0, 0.4);
  WaveField2D psi = assemble_from_modes({{1, m0}}, g, grid, 16);
  WaveField2D out = evolve_full_2d(psi, g, c, 0.01, 50);
  for (int k : {-2, 0, 2, 3}) {
    WaveField1D leak = project_mode(out, g, k);
    double mx = 0;
    for (auto& z : leak.v) mx = std::max(mx, std::abs(z));
    CHECK(mx < 1e-8);
  }
}

TEST_CASE("delta_V toggle changes the reduced dynamics measurably") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::tanh_step(1.0, 0.0, 1.0, 0.3));  // e^{0.3 tanh x}
  const Grid1D grid = make_grid(-14.0, 14.0, 561);
  WaveField1D psi0 = gaussian_packet(grid, 1.0, -3.0, 1.0);
  const double E1 = 0.5;  // k = 1
  WaveField1D with = evolve_reduced_1d(psi0, g, c, E1, 0.005, 400, true);
  WaveField1D without = evolve_reduced_1d(psi0, g, c, E1, 0.005, 400, false);
  double num = 0, den = 0;
  for (int i = 0; i < grid.n; ++i) {
    num += std::norm(with.v[i] - without.v[i]);
    den += std::norm(with.v[i]);
  }
  CHECK(std::sqrt(num / den) > 1e-3);
}

TEST_CASE("time-dependent stepper reduces to the static one when dt b = 0") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::tanh_step(1.0, 0.2));  // no history coupling
  const Grid1D grid = make_grid(-8.0, 8.0, 121);
  WaveField1D m0 = gaussian_packet(grid, 1.0, 0.0, 0.3);
  WaveField2D psi = assemble_from_modes({{1, m0}}, g, grid, 8);
  WaveField2D a = evolve_full_2d(psi, g, c, 0.01, 20);
  WaveField2D b = evolve_time_dependent(psi, g, c, 0.01, 20);
  double mx = 0;
  for (size_t i = 0; i < a.v.size(); ++i) mx = std::max(mx, std::abs(a.v[i] - b.v[i]));
  CHECK(mx < 1e-12);
}

TEST_CASE("time-dependent covariant norm: conserved with the compensation term") {
  PhysicsConstants c;
  // b(x, t) = e^{0.1 t} (1 + 0.1 tanh x)
  auto g = tube(RadiusProfile::tanh_step(1.0, 0.1).with_history(0.1));
  const Grid1D grid = make_grid(-8.0, 8.0, 121);
  WaveField1D m0 = gaussian_packet(grid, 1.0, 0.0, 0.3);
  WaveField2D psi = assemble_from_modes({{1, m0}}, g, grid, 8);

  const double dt = 0.01;
  WaveField2D f = psi;
  TimeDepStepper st(g, c, grid, 8, dt, true);
  double worst = 0.0;
  for (int s = 0; s < 40; ++s) {
    const double n_before = f.norm_sq(g, s * dt);
    st.step(f, s * dt);
    const double n_after = f.norm_sq(g, (s + 1) * dt);
    worst = std::max(worst, std::abs(n_after - n_before) / n_before);
  }
  CHECK(worst < 1e-8);

  // ablation drifts at first order in dt
  auto drift = [&](double dtv) {
    WaveField2D h = psi;
    TimeDepStepper ab(g, c, grid, 8, dtv, false);
    const double n_before = h.norm_sq(g, 0.0);
    ab.step(h, 0.0);
    return std::abs(h.norm_sq(g, dtv) - n_before) / n_before;
  };
  const double d1 = drift(0.02), d2 = drift(0.01), d3 = drift(0.005);
  const double slope = std::log(d1 / d3) / std::log(4.0);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.25));
  CHECK(d1 > d2);
  CHECK(d2 > d3);
}

TEST_CASE("ehrenfest residual: free motion and input validation") {
  std::vector<double> xs, gr;
  for (int i = 0; i <= 10; ++i) {
    xs.push_back(0.3 + 0.7 * 0.05 * i);  // uniform velocity
    gr.push_back(0.0);
  }
  auto r = ehrenfest_residual(xs, gr, 0.05, 1.0);
  for (double v : r) CHECK(std::abs(v) < 1e-10);
  CHECK_THROWS_AS(ehrenfest_residual({0.0, 1.0}, {0.0, 0.0}, 0.1, 1.0),
                  std::invalid_argument);
}

TEST_CASE("boundary mass monitor aborts contaminated runs") {
  PhysicsConstants c;
  auto g = tube(RadiusProfile::constant(1.0));
  const Grid1D grid = make_grid(-3.0, 3.0, 61);
  WaveField1D psi = gaussian_packet(grid, 1.0, 0.0, 2.0);  // fast packet, tiny box
  CHECK_THROWS_AS(evolve_reduced_1d(psi, g, c, 0.0, 0.01, 200, true),
                  std::runtime_error);
}
