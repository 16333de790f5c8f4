/* Grid-based Schroedinger oracles. The covariant 2D problem is block-diagonal
 * over circle modes (the Hamiltonian commutes with phi rotations), so each
 * step is a DFT in phi, one complex tridiagonal Crank-Nicolson solve per mode,
 * and an inverse DFT. The x-part uses the flux form of (1/b) d(b d .) on
 * staggered midpoint radii, which is Hermitian under the b-weighted inner
 * product, making the discrete covariant norm exactly conserved.
 */
#include "qtube/pde.hpp"

#include <cmath>
#include <stdexcept>

namespace qtube {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

void cn_step(const Tridiag& H, double dt, double hbar, std::vector<Complex>& u) {
  const int n = H.n();
  if (static_cast<int>(u.size()) != n) throw std::invalid_argument("cn_step: size");
  const Complex c(0.0, 0.5 * dt / hbar);
  // rhs = (1 - c H) u on the interior; Dirichlet ends stay zero
  std::vector<Complex> rhs(n, Complex(0, 0));
  for (int i = 1; i + 1 < n; ++i) {
    rhs[i] = u[i] - c * (H.lower[i] * u[i - 1] + H.diag[i] * u[i] +
                         H.upper[i] * u[i + 1]);
  }
  // Thomas solve of (1 + c H) on the interior
  const int m = n - 2;
  if (m <= 0) return;
  std::vector<Complex> cp(m), dp(m);
  Complex beta = 1.0 + c * H.diag[1];
  cp[0] = c * H.upper[1] / beta;
  dp[0] = rhs[1] / beta;
  for (int i = 1; i < m; ++i) {
    const Complex a = c * H.lower[i + 1];
    const Complex b = 1.0 + c * H.diag[i + 1];
    const Complex cc = c * H.upper[i + 1];
    const Complex denom = b - a * cp[i - 1];
    if (std::abs(denom) < 1e-300)
      throw std::runtime_error("cn_step: tridiagonal solve broke down");
    cp[i] = cc / denom;
    dp[i] = (rhs[i + 1] - a * dp[i - 1]) / denom;
  }
  u[n - 1] = Complex(0, 0);
  u[0] = Complex(0, 0);
  u[m] = dp[m - 1];
  for (int i = m - 1; i >= 1; --i) u[i] = dp[i - 1] - cp[i - 1] * u[i + 1];
}

Tridiag reduced_hamiltonian(const TubeGeometry& geom, const PhysicsConstants& c,
                            const Grid1D& grid, double E_phi, bool include_delta_v,
                            double eta) {
  Tridiag H;
  const int n = grid.n;
  H.lower.assign(n, 0.0);
  H.diag.assign(n, 0.0);
  H.upper.assign(n, 0.0);
  const double t = c.hbar * c.hbar / (2.0 * c.mass * grid.dx * grid.dx);
  for (int i = 0; i < n; ++i) {
    const double x = grid.x(i);
    double V = classical_effective_potential(geom, c, x, E_phi, eta);
    if (include_delta_v) V += delta_v_eff_from_b(geom, c, x, geom.d, eta);
    H.diag[i] = 2.0 * t + V;
    H.lower[i] = -t;
    H.upper[i] = -t;
  }
  return H;
}

Tridiag mode_block_hamiltonian(const TubeGeometry& geom, const PhysicsConstants& c,
                               const Grid1D& grid, int k, double eta) {
  Tridiag H;
  const int n = grid.n;
  H.lower.assign(n, 0.0);
  H.diag.assign(n, 0.0);
  H.upper.assign(n, 0.0);
  const double t = c.hbar * c.hbar / (2.0 * c.mass * grid.dx * grid.dx);
  for (int i = 0; i < n; ++i) {
    const double x = grid.x(i);
    const double bi = geom.profile.b(x, eta);
    const double bp = geom.profile.b(x + 0.5 * grid.dx, eta);
    const double bm = geom.profile.b(x - 0.5 * grid.dx, eta);
    const double R = scalar_curvature(geom, x, eta);
    const double Ek = c.hbar * c.hbar * k * k / (2.0 * c.mass * bi * bi);
    H.diag[i] = t * (bp + bm) / bi +
                c.hbar * c.hbar / (2.0 * c.mass) * c.xi * R + c.V0(x) + Ek;
    H.lower[i] = -t * bm / bi;
    H.upper[i] = -t * bp / bi;
  }
  return H;
}

Tridiag mode_block_hamiltonian_sym(const TubeGeometry& geom,
                                   const PhysicsConstants& c, const Grid1D& grid,
                                   int k, double eta) {
  Tridiag H = mode_block_hamiltonian(geom, c, grid, k, eta);
  // conjugate by diag(b^{1/2}): offdiag_ij -> offdiag_ij * sqrt(b_i/b_j)
  for (int i = 0; i < grid.n; ++i) {
    const double bi = geom.profile.b(grid.x(i), eta);
    if (i > 0) {
      const double bj = geom.profile.b(grid.x(i - 1), eta);
      H.lower[i] *= std::sqrt(bi / bj);
    }
    if (i + 1 < grid.n) {
      const double bj = geom.profile.b(grid.x(i + 1), eta);
      H.upper[i] *= std::sqrt(bi / bj);
    }
  }
  return H;
}

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<Complex>& a, int sign) {
  const int n = static_cast<int>(a.size());
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / len;
    const Complex wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (int j = 0; j < len / 2; ++j) {
        const Complex u = a[i + j];
        const Complex v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

void dft_naive(std::vector<Complex>& a, int sign) {
  const int n = static_cast<int>(a.size());
  std::vector<Complex> out(n, Complex(0, 0));
  for (int k = 0; k < n; ++k) {
    Complex acc(0, 0);
    for (int j = 0; j < n; ++j)
      acc += a[j] * std::exp(Complex(0.0, sign * 2.0 * kPi * j * k / n));
    out[k] = acc;
  }
  a.swap(out);
}

}  // namespace

void dft_inplace(std::vector<Complex>& a, int sign) {
  if (is_pow2(static_cast<int>(a.size())))
    fft_radix2(a, sign);
  else
    dft_naive(a, sign);
}

namespace {

int bin_to_k(int bin, int n) { return bin < n / 2 ? bin : bin - n; }

// phi rows -> mode vectors (over x) and back
void to_modes(const WaveField2D& f, std::vector<std::vector<Complex>>& modes) {
  const int n = f.n_phi;
  modes.assign(n, std::vector<Complex>(f.xgrid.n));
  std::vector<Complex> row(n);
  for (int i = 0; i < f.xgrid.n; ++i) {
    for (int j = 0; j < n; ++j) row[j] = f.at(i, j);
    dft_inplace(row, -1);
    for (int bin = 0; bin < n; ++bin) modes[bin][i] = row[bin] / double(n);
  }
}

void from_modes(const std::vector<std::vector<Complex>>& modes, WaveField2D& f) {
  const int n = f.n_phi;
  std::vector<Complex> row(n);
  for (int i = 0; i < f.xgrid.n; ++i) {
    for (int bin = 0; bin < n; ++bin) row[bin] = modes[bin][i];
    dft_inplace(row, +1);
    for (int j = 0; j < n; ++j) f.at(i, j) = row[j];
  }
}

}  // namespace

Full2DStepper::Full2DStepper(const TubeGeometry& geom, const PhysicsConstants& c,
                             const Grid1D& xgrid, int n_phi, double dt)
    : xgrid_(xgrid), n_phi_(n_phi), dt_(dt), hbar_(c.hbar) {
  blocks_.reserve(n_phi);
  for (int bin = 0; bin < n_phi; ++bin)
    blocks_.push_back(mode_block_hamiltonian(geom, c, xgrid, bin_to_k(bin, n_phi)));
}

void Full2DStepper::step(WaveField2D& f) const {
  if (!f.xgrid.same_as(xgrid_) || f.n_phi != n_phi_)
    throw std::invalid_argument("Full2DStepper: field grid mismatch");
  std::vector<std::vector<Complex>> modes;
  to_modes(f, modes);
  for (int bin = 0; bin < n_phi_; ++bin) cn_step(blocks_[bin], dt_, hbar_, modes[bin]);
  from_modes(modes, f);
}

TimeDepStepper::TimeDepStepper(const TubeGeometry& geom, const PhysicsConstants& c,
                               const Grid1D& xgrid, int n_phi, double dt,
                               bool with_compensation)
    : geom_(geom), c_(c), xgrid_(xgrid), n_phi_(n_phi), dt_(dt),
      comp_(with_compensation) {}

void TimeDepStepper::step(WaveField2D& f, double t) {
  if (!f.xgrid.same_as(xgrid_) || f.n_phi != n_phi_)
    throw std::invalid_argument("TimeDepStepper: field grid mismatch");
  const double tm = t + 0.5 * dt_;
  std::vector<std::vector<Complex>> modes;
  to_modes(f, modes);
  if (comp_) {
    // advance chi = b(t)^{1/2} Psi with the symmetric midpoint block
    for (int bin = 0; bin < n_phi_; ++bin) {
      const int k = bin_to_k(bin, n_phi_);
      for (int i = 0; i < xgrid_.n; ++i)
        modes[bin][i] *= std::sqrt(geom_.profile.b(xgrid_.x(i), t));
      Tridiag H = mode_block_hamiltonian_sym(geom_, c_, xgrid_, k, tm);
      cn_step(H, dt_, c_.hbar, modes[bin]);
      for (int i = 0; i < xgrid_.n; ++i)
        modes[bin][i] /= std::sqrt(geom_.profile.b(xgrid_.x(i), t + dt_));
    }
  } else {
    // ablation: step Psi itself with the midpoint Hamiltonian, no
    // compensation term; the covariant norm then drifts at O(dt * dt ln b)
    for (int bin = 0; bin < n_phi_; ++bin) {
      const int k = bin_to_k(bin, n_phi_);
      Tridiag H = mode_block_hamiltonian(geom_, c_, xgrid_, k, tm);
      cn_step(H, dt_, c_.hbar, modes[bin]);
    }
  }
  from_modes(modes, f);
}

// the Dirichlet end points are pinned to zero, so the monitor inspects the
// first dynamical cell on each side
bool boundary_mass_exceeds(const WaveField1D& f, double ratio) {
  double peak = 0.0;
  for (const Complex& z : f.v) peak = std::max(peak, std::abs(z));
  if (peak == 0.0 || f.grid.n < 4) return false;
  const double edge = std::max(std::abs(f.v[1]), std::abs(f.v[f.grid.n - 2]));
  return edge > ratio * peak;
}

bool boundary_mass_exceeds(const WaveField2D& f, double ratio) {
  double peak = 0.0;
  for (const Complex& z : f.v) peak = std::max(peak, std::abs(z));
  if (peak == 0.0 || f.xgrid.n < 4) return false;
  double edge = 0.0;
  for (int j = 0; j < f.n_phi; ++j) {
    edge = std::max(edge, std::abs(f.at(1, j)));
    edge = std::max(edge, std::abs(f.at(f.xgrid.n - 2, j)));
  }
  return edge > ratio * peak;
}

namespace {
void check_boundary(const WaveField2D& f, const EvolveOptions& o) {
  if (o.abort_on_boundary_mass && boundary_mass_exceeds(f, o.abort_ratio))
    throw std::runtime_error("boundary mass monitor: wavepacket reached the x-boundary");
}
void check_boundary(const WaveField1D& f, const EvolveOptions& o) {
  if (o.abort_on_boundary_mass && boundary_mass_exceeds(f, o.abort_ratio))
    throw std::runtime_error("boundary mass monitor: wavepacket reached the x-boundary");
}
}  // namespace

WaveField2D evolve_full_2d(const WaveField2D& field, const TubeGeometry& geom,
                           const PhysicsConstants& c, double dt, int steps,
                           const EvolveOptions& opts) {
  WaveField2D f = field;
  Full2DStepper st(geom, c, f.xgrid, f.n_phi, dt);
  for (int s = 0; s < steps; ++s) {
    st.step(f);
    check_boundary(f, opts);
  }
  return f;
}

WaveField1D evolve_reduced_1d(const WaveField1D& field, const TubeGeometry& geom,
                              const PhysicsConstants& c, double E_phi, double dt,
                              int steps, bool include_delta_v,
                              const EvolveOptions& opts) {
  WaveField1D f = field;
  Tridiag H = reduced_hamiltonian(geom, c, f.grid, E_phi, include_delta_v);
  for (int s = 0; s < steps; ++s) {
    cn_step(H, dt, c.hbar, f.v);
    check_boundary(f, opts);
  }
  return f;
}

WaveField1D evolve_reduced_time_dep(const WaveField1D& field,
                                    const TubeGeometry& geom,
                                    const PhysicsConstants& c, double E_phi,
                                    double dt, int steps, bool include_delta_v,
                                    double t0) {
  WaveField1D f = field;
  for (int s = 0; s < steps; ++s) {
    const double tm = t0 + (s + 0.5) * dt;
    Tridiag H = reduced_hamiltonian(geom, c, f.grid, E_phi, include_delta_v, tm);
    cn_step(H, dt, c.hbar, f.v);
  }
  return f;
}

WaveField2D evolve_time_dependent(const WaveField2D& field, const TubeGeometry& geom,
                                  const PhysicsConstants& c, double dt, int steps,
                                  double t0, bool with_compensation) {
  WaveField2D f = field;
  TimeDepStepper st(geom, c, f.xgrid, f.n_phi, dt, with_compensation);
  for (int s = 0; s < steps; ++s) st.step(f, t0 + s * dt);
  return f;
}

double expectation_x(const WaveField1D& f) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < f.grid.n; ++i) {
    const double p = std::norm(f.v[i]);
    num += f.grid.x(i) * p;
    den += p;
  }
  if (den == 0.0) throw std::invalid_argument("expectation_x: zero field");
  return num / den;
}

double expectation_x(const WaveField2D& f, const TubeGeometry& geom, double eta) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < f.xgrid.n; ++i) {
    const double b = geom.profile.b(f.xgrid.x(i), eta);
    double row = 0.0;
    for (int j = 0; j < f.n_phi; ++j) row += std::norm(f.at(i, j));
    num += f.xgrid.x(i) * b * row;
    den += b * row;
  }
  if (den == 0.0) throw std::invalid_argument("expectation_x: zero field");
  return num / den;
}

std::vector<double> ehrenfest_residual(const std::vector<double>& mean_x,
                                       const std::vector<double>& mean_grad,
                                       double dt_snap, double mass) {
  if (mean_x.size() < 3)
    throw std::invalid_argument("ehrenfest_residual: need at least 3 snapshots");
  if (mean_x.size() != mean_grad.size())
    throw std::invalid_argument("ehrenfest_residual: series length mismatch");
  std::vector<double> r;
  r.reserve(mean_x.size() - 2);
  for (size_t i = 1; i + 1 < mean_x.size(); ++i) {
    const double acc = (mean_x[i + 1] - 2.0 * mean_x[i] + mean_x[i - 1]) /
                       (dt_snap * dt_snap);
    r.push_back(mass * acc + mean_grad[i]);
  }
  return r;
}

}  // namespace qtube
