#ifndef QTUBE_SPECTRAL_HPP
#define QTUBE_SPECTRAL_HPP

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "qtube/geometry.hpp"

namespace qtube {

using Complex = std::complex<double>;

struct Grid1D {
  double x0 = 0.0;
  double dx = 1.0;
  int n = 0;
  double x(int i) const { return x0 + dx * i; }
  double x_last() const { return x0 + dx * (n - 1); }
  bool same_as(const Grid1D& o) const {
    return n == o.n && std::abs(x0 - o.x0) < 1e-12 && std::abs(dx - o.dx) < 1e-12;
  }
};

Grid1D make_grid(double x_min, double x_max, int n);

/// Circle eigenbasis Phi_k = e^{ik phi}/sqrt(2 pi), E_k = hbar^2 k^2 / 2m.
struct ModeBasis {
  double phi_period = 6.283185307179586476925286766559;
  double hbar = 1.0;
  double mass = 1.0;
  int k_max = 8;
};

double eigenvalue(const ModeBasis& basis, int k);
Complex mode_function(int k, double phi);  // e^{ik phi}/sqrt(2 pi)

enum class NormConvention { covariant, reduced };

struct WaveField1D {
  Grid1D grid;
  std::vector<Complex> v;
  NormConvention norm_convention = NormConvention::reduced;

  double norm_sq() const;  // sum |psi|^2 dx
};

struct WaveField2D {
  Grid1D xgrid;
  int n_phi = 0;
  std::vector<Complex> v;  // row-major, v[ix*n_phi + iphi]
  NormConvention norm_convention = NormConvention::covariant;

  double dphi() const;
  double phi(int j) const;
  Complex& at(int ix, int jphi) { return v[static_cast<size_t>(ix) * n_phi + jphi]; }
  const Complex& at(int ix, int jphi) const {
    return v[static_cast<size_t>(ix) * n_phi + jphi];
  }
  // sum |Psi|^2 b(x) dx dphi (d=1 measure), optionally at time/history value eta
  double norm_sq(const TubeGeometry& geom, double eta = 0.0) const;
};

/// psi_k(x) = b(x)^{d/2} Int dphi Phi_k^* Psi(x, phi), trapezoid on the
/// periodic grid. Requires |k| <= n_phi/2.
WaveField1D project_mode(const WaveField2D& field, const TubeGeometry& geom, int k);

/// Psi(x, phi) = sum_k Phi_k(phi) b(x)^{-d/2} psi_k(x). Empty map gives the
/// zero field on the supplied grids.
WaveField2D assemble_from_modes(const std::map<int, WaveField1D>& modes,
                                const TubeGeometry& geom, const Grid1D& xgrid,
                                int n_phi);

// serialization: CSV (x[, phi], re, im) and a little-endian binary layout
void write_csv(const WaveField1D& f, const std::string& path);
void write_csv(const WaveField2D& f, const std::string& path);
void write_binary(const WaveField1D& f, const std::string& path);
WaveField1D read_binary_1d(const std::string& path);
void write_binary(const WaveField2D& f, const std::string& path);
WaveField2D read_binary_2d(const std::string& path);

}  // namespace qtube

#endif
