#include "doctest.h"
#include "qtube/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <cstdio>
#include <fstream>
#include <random>

using namespace qtube;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

TubeGeometry tanh_tube() {
  return TubeGeometry{RadiusProfile::tanh_step(1.0, 0.2), 1, 2 * kPi, -20.0, 20.0};
}
}  // namespace

TEST_CASE("fibre eigenvalues") {
  ModeBasis b;
  CHECK(eigenvalue(b, 0) == doctest::Approx(0.0));
  CHECK(eigenvalue(b, 3) == doctest::Approx(4.5));
  ModeBasis b2{2 * kPi, 2.0, 1.0, 8};
  CHECK(eigenvalue(b2, 1) == doctest::Approx(2.0));
  CHECK_THROWS_AS(eigenvalue(b, 9), std::invalid_argument);
}

TEST_CASE("orthonormality under periodic quadrature") {
  const int kmax = 8, nphi = 2 * kmax + 2;
  const double dphi = 2 * kPi / nphi;
  for (int k = -kmax; k <= kmax; ++k)
    for (int kp = -kmax; kp <= kmax; ++kp) {
      Complex acc(0, 0);
      for (int j = 0; j < nphi; ++j)
        acc += mode_function(k, dphi * j) * std::conj(mode_function(kp, dphi * j));
      acc *= dphi;
      const double expect = (k == kp) ? 1.0 : 0.0;
      CHECK(std::abs(acc - expect) < 1e-12);
    }
}

TEST_CASE("mode projection picks out components") {
  const TubeGeometry g = tanh_tube();
  const Grid1D grid = make_grid(-4.0, 4.0, 41);
  const int nphi = 16;

  auto f = [](double x) { return Complex(std::exp(-x * x), 0.3 * x); };
  auto h = [](double x) { return Complex(std::sin(x), std::cos(x)); };

  WaveField2D psi;
  psi.xgrid = grid;
  psi.n_phi = nphi;
  psi.v.assign(static_cast<size_t>(grid.n) * nphi, Complex(0, 0));
  for (int i = 0; i < grid.n; ++i) {
    const double bf = std::pow(g.profile.b(grid.x(i)), -0.5);
    for (int j = 0; j < nphi; ++j)
      psi.at(i, j) = bf * (mode_function(1, psi.phi(j)) * f(grid.x(i)) +
                           mode_function(2, psi.phi(j)) * h(grid.x(i)));
  }

  WaveField1D p2 = project_mode(psi, g, 2);
  WaveField1D p3 = project_mode(psi, g, 3);
  for (int i = 0; i < grid.n; ++i) {
    CHECK(std::abs(p2.v[i] - h(grid.x(i))) < 1e-12);
    CHECK(std::abs(p3.v[i]) < 1e-12);
  }
  CHECK_THROWS_AS(project_mode(psi, g, 9), std::invalid_argument);
}

TEST_CASE("assemble/project round trip and Parseval") {
  const TubeGeometry g = tanh_tube();
  const Grid1D grid = make_grid(-3.0, 3.0, 33);
  const int nphi = 32;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  std::map<int, WaveField1D> modes;
  for (int k = -5; k <= 5; ++k) {
    WaveField1D m;
    m.grid = grid;
    m.v.resize(grid.n);
    for (auto& z : m.v) z = Complex(u(rng), u(rng));
    modes[k] = m;
  }
  WaveField2D psi = assemble_from_modes(modes, g, grid, nphi);

  double sum_reduced = 0.0;
  for (auto& [k, m] : modes) {
    WaveField1D back = project_mode(psi, g, k);
    for (int i = 0; i < grid.n; ++i) CHECK(std::abs(back.v[i] - m.v[i]) < 1e-12);
    sum_reduced += m.norm_sq();
  }
  CHECK(psi.norm_sq(g) == doctest::Approx(sum_reduced).epsilon(1e-10));

  WaveField2D empty = assemble_from_modes({}, g, grid, nphi);
  for (auto& z : empty.v) CHECK(std::abs(z) == 0.0);
}

TEST_CASE("single constant mode assembles to the phi-independent state") {
  const TubeGeometry g = tanh_tube();
  const Grid1D grid = make_grid(-1.0, 1.0, 5);
  WaveField1D m;
  m.grid = grid;
  m.v.assign(grid.n, Complex(1.0, 0.0));
  WaveField2D psi = assemble_from_modes({{0, m}}, g, grid, 8);
  for (int i = 0; i < grid.n; ++i) {
    const double expect = 1.0 / (std::sqrt(g.profile.b(grid.x(i))) * std::sqrt(2 * kPi));
    for (int j = 0; j < 8; ++j) CHECK(std::abs(psi.at(i, j) - expect) < 1e-13);
  }
}

TEST_CASE("binary serialization round trip") {
  WaveField1D f;
  f.grid = make_grid(-1.0, 2.0, 7);
  f.v.resize(7);
  for (int i = 0; i < 7; ++i) f.v[i] = Complex(i * 0.1, -i * 0.2);
  const std::string path = "/tmp/qtube_test_field.bin";
  write_binary(f, path);
  WaveField1D g = read_binary_1d(path);
  CHECK(g.grid.n == f.grid.n);
  for (int i = 0; i < 7; ++i) CHECK(g.v[i] == f.v[i]);
  std::remove(path.c_str());

  WaveField2D f2;
  f2.xgrid = make_grid(0.0, 1.0, 3);
  f2.n_phi = 4;
  f2.v.resize(12);
  for (int i = 0; i < 12; ++i) f2.v[i] = Complex(i, 12 - i);
  write_binary(f2, path);
  WaveField2D g2 = read_binary_2d(path);
  CHECK(g2.n_phi == 4);
  for (int i = 0; i < 12; ++i) CHECK(g2.v[i] == f2.v[i]);
  std::remove(path.c_str());
}

TEST_CASE("csv serialization writes the documented columns") {
  WaveField1D f;
  f.grid = make_grid(0.0, 1.0, 3);
  f.v = {Complex(1, 2), Complex(3, 4), Complex(5, 6)};
  const std::string path = "/tmp/qtube_test_field.csv";
  write_csv(f, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "x,re,im");
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
  std::remove(path.c_str());
}
