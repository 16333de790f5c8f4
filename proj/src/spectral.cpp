#include "qtube/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qtube {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

Grid1D make_grid(double x_min, double x_max, int n) {
  if (n < 2) throw std::invalid_argument("make_grid: need n >= 2");
  return Grid1D{x_min, (x_max - x_min) / (n - 1), n};
}

double eigenvalue(const ModeBasis& basis, int k) {
  if (std::abs(k) > basis.k_max)
    throw std::invalid_argument("eigenvalue: |k| exceeds k_max");
  return basis.hbar * basis.hbar * k * k / (2.0 * basis.mass);
}

Complex mode_function(int k, double phi) {
  return std::exp(Complex(0.0, k * phi)) / std::sqrt(kTwoPi);
}

double WaveField1D::norm_sq() const {
  double s = 0.0;
  for (const Complex& z : v) s += std::norm(z);
  return s * grid.dx;
}

double WaveField2D::dphi() const { return kTwoPi / n_phi; }
double WaveField2D::phi(int j) const { return kTwoPi * j / n_phi; }

double WaveField2D::norm_sq(const TubeGeometry& geom, double eta) const {
  double s = 0.0;
  for (int i = 0; i < xgrid.n; ++i) {
    const double b = geom.profile.b(xgrid.x(i), eta);
    double row = 0.0;
    for (int j = 0; j < n_phi; ++j) row += std::norm(at(i, j));
    s += b * row;
  }
  return s * xgrid.dx * dphi();
}

WaveField1D project_mode(const WaveField2D& field, const TubeGeometry& geom, int k) {
  if (field.n_phi < 2) throw std::invalid_argument("project_mode: needs a phi grid");
  if (2 * std::abs(k) > field.n_phi)
    throw std::invalid_argument("project_mode: |k| > n_phi/2 would alias");
  WaveField1D out;
  out.grid = field.xgrid;
  out.v.assign(field.xgrid.n, Complex(0.0, 0.0));
  out.norm_convention = NormConvention::reduced;
  const double w = field.dphi();
  for (int i = 0; i < field.xgrid.n; ++i) {
    Complex acc(0.0, 0.0);
    for (int j = 0; j < field.n_phi; ++j)
      acc += std::conj(mode_function(k, field.phi(j))) * field.at(i, j);
    const double bfac = std::pow(geom.profile.b(field.xgrid.x(i)), 0.5 * geom.d);
    out.v[i] = bfac * w * acc;
  }
  return out;
}

WaveField2D assemble_from_modes(const std::map<int, WaveField1D>& modes,
                                const TubeGeometry& geom, const Grid1D& xgrid,
                                int n_phi) {
  WaveField2D out;
  out.xgrid = xgrid;
  out.n_phi = n_phi;
  out.v.assign(static_cast<size_t>(xgrid.n) * n_phi, Complex(0.0, 0.0));
  out.norm_convention = NormConvention::covariant;
  for (const auto& [k, psik] : modes) {
    if (!psik.grid.same_as(xgrid))
      throw std::invalid_argument("assemble_from_modes: inconsistent grids");
    for (int i = 0; i < xgrid.n; ++i) {
      const double bfac = std::pow(geom.profile.b(xgrid.x(i)), -0.5 * geom.d);
      const Complex a = bfac * psik.v[i];
      for (int j = 0; j < n_phi; ++j) out.at(i, j) += mode_function(k, out.phi(j)) * a;
    }
  }
  return out;
}

namespace {

void fput_double(std::FILE* fp, double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::fputs(buf, fp);
}

struct FileCloser {
  std::FILE* fp;
  ~FileCloser() {
    if (fp) std::fclose(fp);
  }
};

std::FILE* open_or_throw(const std::string& path, const char* mode) {
  std::FILE* fp = std::fopen(path.c_str(), mode);
  if (!fp) throw std::runtime_error("cannot open " + path);
  return fp;
}

}  // namespace

void write_csv(const WaveField1D& f, const std::string& path) {
  std::FILE* fp = open_or_throw(path, "w");
  FileCloser fc{fp};
  std::fputs("x,re,im\n", fp);
  for (int i = 0; i < f.grid.n; ++i) {
    fput_double(fp, f.grid.x(i));
    std::fputc(',', fp);
    fput_double(fp, f.v[i].real());
    std::fputc(',', fp);
    fput_double(fp, f.v[i].imag());
    std::fputc('\n', fp);
  }
}

void write_csv(const WaveField2D& f, const std::string& path) {
  std::FILE* fp = open_or_throw(path, "w");
  FileCloser fc{fp};
  std::fputs("x,phi,re,im\n", fp);
  for (int i = 0; i < f.xgrid.n; ++i)
    for (int j = 0; j < f.n_phi; ++j) {
      fput_double(fp, f.xgrid.x(i));
      std::fputc(',', fp);
      fput_double(fp, f.phi(j));
      std::fputc(',', fp);
      fput_double(fp, f.at(i, j).real());
      std::fputc(',', fp);
      fput_double(fp, f.at(i, j).imag());
      std::fputc('\n', fp);
    }
}

// Binary layout (little-endian): magic "QTWF", u32 version=1, u8 dims,
// then for 1d: f64 x0, f64 dx, u32 n; for 2d additionally u32 n_phi;
// then n (or n*n_phi) pairs of f64 (re, im).
namespace {
constexpr char kMagic[4] = {'Q', 'T', 'W', 'F'};
}

void write_binary(const WaveField1D& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write(kMagic, 4);
  uint32_t version = 1;
  uint8_t dims = 1;
  os.write(reinterpret_cast<const char*>(&version), 4);
  os.write(reinterpret_cast<const char*>(&dims), 1);
  os.write(reinterpret_cast<const char*>(&f.grid.x0), 8);
  os.write(reinterpret_cast<const char*>(&f.grid.dx), 8);
  uint32_t n = f.grid.n;
  os.write(reinterpret_cast<const char*>(&n), 4);
  for (const Complex& z : f.v) {
    double re = z.real(), im = z.imag();
    os.write(reinterpret_cast<const char*>(&re), 8);
    os.write(reinterpret_cast<const char*>(&im), 8);
  }
}

WaveField1D read_binary_1d(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  uint32_t version;
  uint8_t dims;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&dims), 1);
  if (std::memcmp(magic, kMagic, 4) != 0 || version != 1 || dims != 1)
    throw std::runtime_error("bad 1d wavefield header in " + path);
  WaveField1D f;
  uint32_t n;
  is.read(reinterpret_cast<char*>(&f.grid.x0), 8);
  is.read(reinterpret_cast<char*>(&f.grid.dx), 8);
  is.read(reinterpret_cast<char*>(&n), 4);
  f.grid.n = n;
  f.v.resize(n);
  for (uint32_t i = 0; i < n; ++i) {
    double re, im;
    is.read(reinterpret_cast<char*>(&re), 8);
    is.read(reinterpret_cast<char*>(&im), 8);
    f.v[i] = Complex(re, im);
  }
  if (!is) throw std::runtime_error("truncated wavefield file " + path);
  return f;
}

void write_binary(const WaveField2D& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write(kMagic, 4);
  uint32_t version = 1;
  uint8_t dims = 2;
  os.write(reinterpret_cast<const char*>(&version), 4);
  os.write(reinterpret_cast<const char*>(&dims), 1);
  os.write(reinterpret_cast<const char*>(&f.xgrid.x0), 8);
  os.write(reinterpret_cast<const char*>(&f.xgrid.dx), 8);
  uint32_t n = f.xgrid.n, np = f.n_phi;
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&np), 4);
  for (const Complex& z : f.v) {
    double re = z.real(), im = z.imag();
    os.write(reinterpret_cast<const char*>(&re), 8);
    os.write(reinterpret_cast<const char*>(&im), 8);
  }
}

WaveField2D read_binary_2d(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  uint32_t version;
  uint8_t dims;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&dims), 1);
  if (std::memcmp(magic, kMagic, 4) != 0 || version != 1 || dims != 2)
    throw std::runtime_error("bad 2d wavefield header in " + path);
  WaveField2D f;
  uint32_t n, np;
  is.read(reinterpret_cast<char*>(&f.xgrid.x0), 8);
  is.read(reinterpret_cast<char*>(&f.xgrid.dx), 8);
  is.read(reinterpret_cast<char*>(&n), 4);
  is.read(reinterpret_cast<char*>(&np), 4);
  f.xgrid.n = n;
  f.n_phi = np;
  f.v.resize(static_cast<size_t>(n) * np);
  for (auto& z : f.v) {
    double re, im;
    is.read(reinterpret_cast<char*>(&re), 8);
    is.read(reinterpret_cast<char*>(&im), 8);
    z = Complex(re, im);
  }
  if (!is) throw std::runtime_error("truncated wavefield file " + path);
  return f;
}

}  // namespace qtube
