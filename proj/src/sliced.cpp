/* Time-sliced machinery: grid-quadrature kernel composition, the brute-force
 * lattice path sum (static case memoized over slice kernels, time/history
 * cases evaluated along each enumerated path), mode-sum assembly, and the
 * convergence-order fit.
 */
#include "qtube/sliced.hpp"

#include <cmath>
#include <stdexcept>

namespace qtube {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

std::vector<double> trapezoid_weights(const Grid1D& g) {
  std::vector<double> w(g.n, g.dx);
  if (g.n >= 2) {
    w.front() = 0.5 * g.dx;
    w.back() = 0.5 * g.dx;
  }
  return w;
}

int grid_index_of(const Grid1D& g, double x, const char* what) {
  const double t = (x - g.x0) / g.dx;
  const int i = static_cast<int>(std::lround(t));
  if (i < 0 || i >= g.n || std::abs(t - i) > 1e-9)
    throw std::invalid_argument(std::string(what) + ": endpoint not on the grid");
  return i;
}
}  // namespace

std::vector<Complex> KernelMatrix::apply(const std::vector<Complex>& psi) const {
  const int nn = n();
  if (static_cast<int>(psi.size()) != nn)
    throw std::invalid_argument("KernelMatrix::apply: size mismatch");
  std::vector<Complex> out(nn, Complex(0, 0));
  for (int i = 0; i < nn; ++i) {
    Complex acc(0, 0);
    const Complex* row = &K[static_cast<size_t>(i) * nn];
    for (int j = 0; j < nn; ++j) acc += row[j] * weights[j] * psi[j];
    out[i] = acc;
  }
  return out;
}

KernelMatrix compose(const KernelMatrix& kernel, int steps) {
  if (steps < 1) throw std::invalid_argument("compose: steps must be >= 1");
  const int n = kernel.n();
  if (static_cast<long long>(n) * n * (steps - 1) > 4'000'000'000LL)
    throw std::invalid_argument("compose: budget exceeded");
  KernelMatrix out = kernel;
  std::vector<Complex> tmp(static_cast<size_t>(n) * n);
  for (int s = 1; s < steps; ++s) {
    // tmp = out * diag(w) * kernel
    for (int i = 0; i < n; ++i) {
      const Complex* arow = &out.K[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) tmp[static_cast<size_t>(i) * n + j] = Complex(0, 0);
      for (int l = 0; l < n; ++l) {
        const Complex alw = arow[l] * kernel.weights[l];
        const Complex* brow = &kernel.K[static_cast<size_t>(l) * n];
        Complex* trow = &tmp[static_cast<size_t>(i) * n];
        for (int j = 0; j < n; ++j) trow[j] += alw * brow[j];
      }
    }
    out.K.swap(tmp);
    out.slices += kernel.slices;
  }
  return out;
}

KernelMatrix one_step_reduced(const TubeGeometry& geom, const PhysicsConstants& c,
                              int k, const Grid1D& grid, double eps) {
  KernelMatrix m;
  m.grid = grid;
  m.eps = eps;
  m.slices = 1;
  m.weights = trapezoid_weights(grid);
  m.K.resize(static_cast<size_t>(grid.n) * grid.n);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j)
      m.K[static_cast<size_t>(i) * grid.n + j] =
          short_time_mode(geom, c, k, grid.x(i), grid.x(j), eps);
  return m;
}

KernelMatrix reduced_path_propagator(const TubeGeometry& geom,
                                     const PhysicsConstants& c, int k,
                                     const Grid1D& grid, double T, int N) {
  if (N < 1) throw std::invalid_argument("reduced_path_propagator: N < 1");
  KernelMatrix one = one_step_reduced(geom, c, k, grid, T / N);
  return compose(one, N);
}

ModeSumResult mode_sum_propagator(const TubeGeometry& geom, const PhysicsConstants& c,
                                  const Grid1D& grid, double x_f, double phi_f,
                                  double x_0, double phi_0, double T, int N,
                                  int k_max, double tail_tolerance) {
  const int i_f = grid_index_of(grid, x_f, "mode_sum_propagator");
  const int i_0 = grid_index_of(grid, x_0, "mode_sum_propagator");
  const double bf = geom.profile.b(x_f);
  const double b0 = geom.profile.b(x_0);
  const double bfac = std::pow(bf * b0, -0.5 * geom.d);

  ModeSumResult r;
  double shell = 0.0;
  for (int k = -k_max; k <= k_max; ++k) {
    KernelMatrix Kk = reduced_path_propagator(geom, c, k, grid, T, N);
    const Complex term = mode_function(k, phi_f) * std::conj(mode_function(k, phi_0)) *
                         bfac * Kk.at(i_f, i_0);
    r.value += term;
    if (std::abs(k) == k_max) shell += std::abs(term);
  }
  r.tail_estimate = shell / std::max(std::abs(r.value), 1e-300);
  r.tail_flagged = r.tail_estimate > tail_tolerance;
  return r;
}

Complex brute_force_full(const TubeGeometry& geom, const PhysicsConstants& c,
                         const BruteForceSpec& s) {
  const int nx = s.x_grid.n;
  const int np = s.n_phi;
  const int interior = s.N - 1;
  if (s.N < 1) throw std::invalid_argument("brute_force_full: N < 1");
  const double n_states = static_cast<double>(nx) * np;
  if (interior > 0 && std::pow(n_states, interior) > static_cast<double>(s.budget))
    throw std::invalid_argument("brute_force_full: path budget exceeded");

  const double eps = s.T / s.N;
  const double dphi_w = 2.0 * kPi / np;
  const std::vector<double> wx = trapezoid_weights(s.x_grid);
  const bool is_static = s.dynamics.kind == PathDynamics::Kind::static_case;

  if (s.N == 1)
    return short_time_full(geom, c, s.x_f, s.x_0, s.phi_f - s.phi_0, eps,
                           is_static ? StepContext{}
                                     : StepContext{0.0, eps * s.dynamics.f_at(s.x_f),
                                                   s.dynamics.f_at(s.x_f)},
                           s.windings);

  auto xs = [&](int i) { return s.x_grid.x(i); };
  auto phis = [&](int j) { return dphi_w * j; };

  // static-case slice kernel tables
  std::vector<Complex> t_first, t_mid, t_last;
  std::vector<double> meas(static_cast<size_t>(nx), 0.0);
  if (is_static) {
    t_first.resize(static_cast<size_t>(nx) * np);
    t_last.resize(static_cast<size_t>(nx) * np);
    t_mid.resize(static_cast<size_t>(nx) * nx * np);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < np; ++j) {
        t_first[static_cast<size_t>(i) * np + j] = short_time_full(
            geom, c, xs(i), s.x_0, phis(j) - s.phi_0, eps, {}, s.windings);
        t_last[static_cast<size_t>(i) * np + j] = short_time_full(
            geom, c, s.x_f, xs(i), s.phi_f - phis(j), eps, {}, s.windings);
      }
    for (int i1 = 0; i1 < nx; ++i1)
      for (int i0 = 0; i0 < nx; ++i0)
        for (int dj = 0; dj < np; ++dj)
          t_mid[(static_cast<size_t>(i1) * nx + i0) * np + dj] = short_time_full(
              geom, c, xs(i1), xs(i0), phis(dj), eps, {}, s.windings);
    for (int i = 0; i < nx; ++i)
      meas[i] = wx[i] * dphi_w * std::pow(geom.profile.b(xs(i)), geom.d);
  }

  // odometer over interior slice states (x index, phi index per slice)
  std::vector<int> ix(interior, 0), jp(interior, 0);
  Complex total(0, 0);
  bool done = false;
  while (!done) {
    Complex amp(1.0, 0.0);
    if (is_static) {
      amp = t_first[static_cast<size_t>(ix[0]) * np + jp[0]] * meas[ix[0]];
      for (int nslice = 1; nslice < interior; ++nslice) {
        const int dj = ((jp[nslice] - jp[nslice - 1]) % np + np) % np;
        amp *= t_mid[(static_cast<size_t>(ix[nslice]) * nx + ix[nslice - 1]) * np + dj] *
               meas[ix[nslice]];
      }
      amp *= t_last[static_cast<size_t>(ix[interior - 1]) * np + jp[interior - 1]];
    } else {
      double eta_prev = 0.0;
      double x_prev = s.x_0, phi_prev = s.phi_0;
      for (int nslice = 1; nslice <= s.N; ++nslice) {
        const bool last = nslice == s.N;
        const double xn = last ? s.x_f : xs(ix[nslice - 1]);
        const double phin = last ? s.phi_f : phis(jp[nslice - 1]);
        const double eta_n = eta_prev + eps * s.dynamics.f_at(xn);
        amp *= short_time_full(geom, c, xn, x_prev, phin - phi_prev, eps,
                               {eta_prev, eta_n, s.dynamics.f_at(xn)}, s.windings);
        if (!last)
          amp *= wx[ix[nslice - 1]] * dphi_w *
                 std::pow(geom.profile.b(xn, eta_n), geom.d);
        eta_prev = eta_n;
        x_prev = xn;
        phi_prev = phin;
      }
    }
    total += amp;

    // advance odometer
    int pos = 0;
    for (;;) {
      if (pos == interior) {
        done = true;
        break;
      }
      if (++jp[pos] < np) break;
      jp[pos] = 0;
      if (++ix[pos] < nx) break;
      ix[pos] = 0;
      ++pos;
    }
  }
  return total;
}

namespace {

// reachable accumulator values per level, quantized for dedup
std::vector<std::vector<double>> eta_levels(const BruteForceSpec& s,
                                            const Grid1D& xg) {
  std::vector<std::vector<double>> S(s.N);
  const double eps = s.T / s.N;
  S[0] = {0.0};  // eta before the first slice
  for (int n = 1; n < s.N; ++n) {
    std::vector<double> next;
    next.reserve(S[n - 1].size() * xg.n);
    for (double e : S[n - 1])
      for (int i = 0; i < xg.n; ++i)
        next.push_back(e + eps * s.dynamics.f_at(xg.x(i)));
    std::sort(next.begin(), next.end());
    std::vector<double> uniq;
    for (double v : next)
      if (uniq.empty() || v - uniq.back() > 1e-12 * (1.0 + std::abs(v)))
        uniq.push_back(v);
    if (uniq.size() > 200000)
      throw std::invalid_argument(
          "brute_force_projected: eta state space too large; use brute_force_full");
    S[n] = std::move(uniq);
  }
  return S;
}

int eta_index(const std::vector<double>& S, double v) {
  auto it = std::lower_bound(S.begin(), S.end(), v - 1e-9 * (1.0 + std::abs(v)));
  if (it == S.end() || std::abs(*it - v) > 1e-8 * (1.0 + std::abs(v)))
    throw std::logic_error("brute_force_projected: eta transition not in table");
  return static_cast<int>(it - S.begin());
}

}  // namespace

BruteForceProjection brute_force_projected(const TubeGeometry& geom,
                                           const PhysicsConstants& c,
                                           const BruteForceSpec& s,
                                           const std::vector<int>& kappas) {
  const int nx = s.x_grid.n;
  const int np = s.n_phi;
  const int interior = s.N - 1;
  if (s.N < 1) throw std::invalid_argument("brute_force_projected: N < 1");
  const double n_states = static_cast<double>(nx) * np;
  const double paths = interior > 0 ? std::pow(n_states, interior) : 1.0;
  if (paths > static_cast<double>(s.budget))
    throw std::invalid_argument("brute_force_projected: path budget exceeded");

  const double eps = s.T / s.N;
  const double dphi_w = 2.0 * kPi / np;
  const std::vector<double> wx = trapezoid_weights(s.x_grid);
  auto xs = [&](int i) { return s.x_grid.x(i); };
  auto phis = [&](int j) { return dphi_w * j; };
  auto kernel = [&](double xl, double xe, double dphi, double eta_prev,
                    double eta_curr) {
    return short_time_full(geom, c, xl, xe, dphi, eps,
                           {eta_prev, eta_curr, s.dynamics.f_at(xl)}, s.windings);
  };

  BruteForceProjection out;
  out.paths = static_cast<long long>(paths);
  if (s.N == 1) {
    out.pointwise = kernel(s.x_f, s.x_0, s.phi_f - s.phi_0, 0.0,
                           eps * s.dynamics.f_at(s.x_f));
    for (int kap : kappas) {
      Complex acc(0, 0);
      for (int jf = 0; jf < np; ++jf)
        acc += std::exp(Complex(0, -kap * phis(jf))) *
               kernel(s.x_f, s.x_0, phis(jf) - s.phi_0, 0.0,
                      eps * s.dynamics.f_at(s.x_f)) *
               dphi_w;
      out.final_modes[kap] = acc;
    }
    return out;
  }

  const std::vector<std::vector<double>> S = eta_levels(s, s.x_grid);

  // first-slice kernels (eta_prev = 0) and the measure of the arrival state
  std::vector<Complex> t_first(static_cast<size_t>(nx) * np);
  for (int i = 0; i < nx; ++i) {
    const double eta1 = eps * s.dynamics.f_at(xs(i));
    const double meas = wx[i] * dphi_w * std::pow(geom.profile.b(xs(i), eta1), geom.d);
    for (int j = 0; j < np; ++j)
      t_first[static_cast<size_t>(i) * np + j] =
          kernel(xs(i), s.x_0, phis(j) - s.phi_0, 0.0, eta1) * meas;
  }

  // middle-slice kernels per level: [eta_idx_prev][i_to][i_from][dj], with the
  // arrival measure folded in
  std::vector<std::vector<Complex>> t_mid(std::max(0, interior - 1));
  std::vector<std::vector<int>> trans(s.N);  // trans[n][e*nx + i] -> eta idx at n
  for (int n = 1; n < s.N; ++n) {
    trans[n].resize(S[n - 1].size() * nx);
    for (size_t e = 0; e < S[n - 1].size(); ++e)
      for (int i = 0; i < nx; ++i)
        trans[n][e * nx + i] =
            eta_index(S[n], S[n - 1][e] + eps * s.dynamics.f_at(xs(i)));
  }
  for (int n = 2; n <= interior; ++n) {
    std::vector<Complex>& tab = t_mid[n - 2];
    tab.resize(S[n - 1].size() * nx * nx * np);
    for (size_t e = 0; e < S[n - 1].size(); ++e) {
      const double eta_prev = S[n - 1][e];
      for (int i1 = 0; i1 < nx; ++i1) {
        const double eta_n = eta_prev + eps * s.dynamics.f_at(xs(i1));
        const double meas =
            wx[i1] * dphi_w * std::pow(geom.profile.b(xs(i1), eta_n), geom.d);
        for (int i0 = 0; i0 < nx; ++i0)
          for (int dj = 0; dj < np; ++dj)
            tab[((e * nx + i1) * nx + i0) * np + dj] =
                kernel(xs(i1), xs(i0), phis(dj), eta_prev, eta_n) * meas;
      }
    }
  }

  // final-slice mode contractions per (eta_idx at N-1, i_{N-1}) over the
  // final angle lattice
  std::map<int, std::vector<Complex>> mode_last;
  for (int kap : kappas) mode_last[kap].assign(S[interior].size() * nx, Complex(0, 0));
  for (size_t e = 0; e < S[interior].size(); ++e) {
    const double eta_prev = S[interior][e];
    const double eta_N = eta_prev + eps * s.dynamics.f_at(s.x_f);
    for (int i = 0; i < nx; ++i)
      for (int dj = 0; dj < np; ++dj) {
        const Complex k = kernel(s.x_f, xs(i), phis(dj), eta_prev, eta_N);
        for (int kap : kappas)
          mode_last[kap][e * nx + i] +=
              std::exp(Complex(0, -kap * phis(dj))) * k * dphi_w;
      }
  }

  // depth-first enumeration with partial products, binned over the last
  // interior state
  std::vector<Complex> bins(S[interior].size() * nx * np, Complex(0, 0));
  std::vector<Complex> amp_stack(interior + 1);
  std::vector<int> is(interior), js(interior), es(interior + 1);
  es[0] = 0;
  int level = 0;
  is[0] = 0;
  js[0] = -1;
  amp_stack[0] = Complex(1, 0);
  while (level >= 0) {
    if (++js[level] >= np) {
      js[level] = 0;
      if (++is[level] >= nx) {
        --level;
        continue;
      }
    }
    const int i = is[level], j = js[level];
    Complex amp;
    if (level == 0) {
      amp = t_first[static_cast<size_t>(i) * np + j];
      es[1] = trans[1][0 * nx + i];
    } else {
      const int ep = es[level];
      const int dj = (j - js[level - 1] + np) % np;
      amp = amp_stack[level] *
            t_mid[level - 1][((static_cast<size_t>(ep) * nx + i) * nx +
                              is[level - 1]) *
                                 np +
                             dj];
      es[level + 1] = trans[level + 1][static_cast<size_t>(ep) * nx + i];
    }
    if (level == interior - 1) {
      bins[(static_cast<size_t>(es[level + 1]) * nx + i) * np + j] += amp;
    } else {
      amp_stack[level + 1] = amp;
      ++level;
      is[level] = 0;
      js[level] = -1;
    }
  }

  // contract the bins with the final slice (pointwise at the true phi_f,
  // modes via the precomputed lattice contraction)
  for (size_t e = 0; e < S[interior].size(); ++e)
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < np; ++j) {
        const Complex amp = bins[(e * nx + i) * np + j];
        if (amp == Complex(0, 0)) continue;
        out.pointwise += amp * kernel(s.x_f, xs(i), s.phi_f - phis(j), S[interior][e],
                                       S[interior][e] + eps * s.dynamics.f_at(s.x_f));
        for (int kap : kappas)
          out.final_modes[kap] += amp * std::exp(Complex(0, -kap * phis(j))) *
                                  mode_last[kap][e * nx + i];
      }
  return out;
}

double fit_convergence_order(const std::vector<std::pair<double, double>>& h_e) {
  if (h_e.size() < 3)
    throw std::invalid_argument("fit_convergence_order: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [h, e] : h_e) {
    if (h <= 0.0 || e <= 0.0)
      throw std::invalid_argument("fit_convergence_order: non-positive entry");
    const double lx = std::log(h), ly = std::log(e);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(h_e.size());
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-300)
    throw std::invalid_argument("fit_convergence_order: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace qtube
