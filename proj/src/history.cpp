/* History-dependent capacity: eta bookkeeping, the eta-augmented reduced
 * evolution (x-step + exact eta-advection), and the reduced lattice path sum
 * against which the full brute force is verified.
 */
#include "qtube/history.hpp"

#include <cmath>
#include <stdexcept>

#include "qtube/pde.hpp"

namespace qtube {

std::vector<double> eta_of_path(const DiscretePath& path,
                                const std::function<double(double)>& f) {
  std::vector<double> eta(path.x.size(), 0.0);
  for (size_t n = 1; n < path.x.size(); ++n)
    eta[n] = eta[n - 1] + path.eps * f(path.x[n]);
  return eta;
}

Complex history_reduced_brute_force(const TubeGeometry& geom,
                                    const PhysicsConstants& c, int k,
                                    const Grid1D& x_grid, double x_f, double x_0,
                                    double T, int N, const PathDynamics& dyn,
                                    EndpointWeight ew, long long budget) {
  if (N < 1) throw std::invalid_argument("history_reduced_brute_force: N < 1");
  const int nx = x_grid.n;
  const int interior = N - 1;
  if (interior > 0 &&
      std::pow(static_cast<double>(nx), interior) > static_cast<double>(budget))
    throw std::invalid_argument("history_reduced_brute_force: path budget exceeded");

  const double eps = T / N;
  std::vector<double> wx(nx, x_grid.dx);
  wx.front() = 0.5 * x_grid.dx;
  wx.back() = 0.5 * x_grid.dx;

  std::vector<int> ix(interior, 0);
  Complex total(0, 0);
  bool done = false;
  while (!done) {
    Complex amp(1.0, 0.0);
    double eta_prev = 0.0;
    double x_prev = x_0;
    for (int nslice = 1; nslice <= N; ++nslice) {
      const bool last = nslice == N;
      const double xn = last ? x_f : x_grid.x(ix[nslice - 1]);
      const double eta_n = eta_prev + eps * dyn.f_at(xn);
      amp *= short_time_mode(geom, c, k, xn, x_prev, eps,
                             {eta_prev, eta_n, dyn.f_at(xn)});
      if (!last) amp *= wx[ix[nslice - 1]];
      eta_prev = eta_n;
      x_prev = xn;
    }
    if (ew == EndpointWeight::per_path)
      amp *= std::pow(geom.profile.b(x_f, eta_prev) * geom.profile.b(x_0, 0.0),
                      -0.5 * geom.d);
    total += amp;

    int pos = 0;
    for (;;) {
      if (pos == interior) {
        done = true;
        break;
      }
      if (++ix[pos] < nx) break;
      ix[pos] = 0;
      ++pos;
    }
  }
  return total;
}

WaveField1D AugmentedField::marginal() const {
  WaveField1D out;
  out.grid = xgrid;
  out.v.assign(xgrid.n, Complex(0, 0));
  for (int i = 0; i < xgrid.n; ++i) {
    Complex acc(0, 0);
    for (int j = 0; j < ctx.n_eta; ++j) acc += at(i, j);
    out.v[i] = acc * ctx.deta();
  }
  return out;
}

double AugmentedField::norm_sq() const {
  double s = 0.0;
  for (const Complex& z : v) s += std::norm(z);
  return s * xgrid.dx * ctx.deta();
}

AugmentedField make_augmented_delta(const WaveField1D& psi0, const HistoryContext& ctx,
                                    double eta_start) {
  AugmentedField f;
  f.xgrid = psi0.grid;
  f.ctx = ctx;
  f.v.assign(static_cast<size_t>(psi0.grid.n) * ctx.n_eta, Complex(0, 0));
  const double t = (eta_start - ctx.eta_min) / ctx.deta();
  const int j0 = static_cast<int>(std::lround(t));
  if (j0 < 0 || j0 >= ctx.n_eta || std::abs(t - j0) > 1e-9)
    throw std::invalid_argument("make_augmented_delta: eta_start not on the grid");
  for (int i = 0; i < psi0.grid.n; ++i) f.at(i, j0) = psi0.v[i] / ctx.deta();
  return f;
}

namespace {

// monotonicity-limited cubic (Fritsch-Carlson) gather of row[j - shift_frac]
void shifted_gather(std::vector<double>& row, double shift, double tol_exact) {
  const int n = static_cast<int>(row.size());
  const double r = std::round(shift);
  std::vector<double> out(n, 0.0);
  if (std::abs(shift - r) < tol_exact) {
    const int s = static_cast<int>(r);
    for (int j = 0; j < n; ++j) {
      const int src = j - s;
      out[j] = (src >= 0 && src < n) ? row[src] : 0.0;
    }
    row.swap(out);
    return;
  }
  // slopes with Fritsch-Carlson limiting
  std::vector<double> d(n, 0.0), m(n, 0.0);
  for (int j = 0; j + 1 < n; ++j) d[j] = row[j + 1] - row[j];
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (int j = 1; j + 1 < n; ++j)
    m[j] = (d[j - 1] * d[j] <= 0.0) ? 0.0 : 0.5 * (d[j - 1] + d[j]);
  for (int j = 0; j + 1 < n; ++j) {
    if (d[j] == 0.0) {
      m[j] = 0.0;
      m[j + 1] = 0.0;
      continue;
    }
    const double a = m[j] / d[j], b = m[j + 1] / d[j];
    const double s2 = a * a + b * b;
    if (s2 > 9.0) {
      const double t = 3.0 / std::sqrt(s2);
      m[j] = t * a * d[j];
      m[j + 1] = t * b * d[j];
    }
  }
  for (int j = 0; j < n; ++j) {
    const double src = j - shift;
    const int j0 = static_cast<int>(std::floor(src));
    const double s = src - j0;
    if (j0 < -1 || j0 > n - 1) {
      out[j] = 0.0;
      continue;
    }
    const double y0 = (j0 >= 0) ? row[j0] : 0.0;
    const double y1 = (j0 + 1 < n && j0 + 1 >= 0) ? row[j0 + 1] : 0.0;
    const double m0 = (j0 >= 0) ? m[j0] : 0.0;
    const double m1 = (j0 + 1 < n && j0 + 1 >= 0) ? m[j0 + 1] : 0.0;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    out[j] = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
  }
  row.swap(out);
}

}  // namespace

void augmented_step(AugmentedField& f, const TubeGeometry& geom,
                    const PhysicsConstants& c, double E_phi, double dt,
                    bool include_delta_v) {
  const int nx = f.xgrid.n;
  const int ne = f.ctx.n_eta;
  const double deta = f.ctx.deta();

  // CFL-like bound: the advection must not jump more than one eta cell... it
  // may jump several cells (the gather is non-local), but f dt must stay
  // within the grid range; enforce the documented rule f_max dt <= deta.
  double fmax = 0.0;
  for (int i = 0; i < nx; ++i) fmax = std::max(fmax, std::abs(f.ctx.f(f.xgrid.x(i))));
  if (fmax * dt > deta * (1.0 + 1e-12))
    throw std::invalid_argument("augmented_step: f_max * dt exceeds the eta spacing");

  // x-step at fixed eta, potential at the midpoint eta + f dt / 2
  std::vector<Complex> col(nx);
  for (int j = 0; j < ne; ++j) {
    Tridiag H;
    H.lower.assign(nx, 0.0);
    H.diag.assign(nx, 0.0);
    H.upper.assign(nx, 0.0);
    const double t = c.hbar * c.hbar / (2.0 * c.mass * f.xgrid.dx * f.xgrid.dx);
    for (int i = 0; i < nx; ++i) {
      const double x = f.xgrid.x(i);
      const double eta_mid = f.ctx.eta(j) + 0.5 * dt * f.ctx.f(x);
      double V = classical_effective_potential(geom, c, x, E_phi, eta_mid);
      if (include_delta_v) V += delta_v_eff_from_b(geom, c, x, geom.d, eta_mid);
      H.diag[i] = 2.0 * t + V;
      H.lower[i] = -t;
      H.upper[i] = -t;
    }
    for (int i = 0; i < nx; ++i) col[i] = f.at(i, j);
    cn_step(H, dt, c.hbar, col);
    for (int i = 0; i < nx; ++i) f.at(i, j) = col[i];
  }

  // exact eta-advection by f(x) dt per x-row
  std::vector<double> re(ne), im(ne);
  double top_mass = 0.0, peak = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double shift = f.ctx.f(f.xgrid.x(i)) * dt / deta;
    for (int j = 0; j < ne; ++j) {
      re[j] = f.at(i, j).real();
      im[j] = f.at(i, j).imag();
    }
    shifted_gather(re, shift, 1e-12);
    shifted_gather(im, shift, 1e-12);
    for (int j = 0; j < ne; ++j) f.at(i, j) = Complex(re[j], im[j]);
  }
  for (const Complex& z : f.v) peak = std::max(peak, std::abs(z));
  for (int i = 0; i < nx; ++i) top_mass = std::max(top_mass, std::abs(f.at(i, ne - 1)));
  if (peak > 0.0 && top_mass > 1e-8 * peak)
    throw std::runtime_error("augmented_step: eta range overflow (mass at eta_max)");
}

AugmentedField augmented_grid_evolution(const AugmentedField& field,
                                        const TubeGeometry& geom,
                                        const PhysicsConstants& c, double E_phi,
                                        double dt, int steps, bool include_delta_v) {
  AugmentedField f = field;
  for (int s = 0; s < steps; ++s) augmented_step(f, geom, c, E_phi, dt, include_delta_v);
  return f;
}

}  // namespace qtube
