/* Python bindings for the main operations: profiles and geometry, effective
 * potentials, short-time kernels, sliced propagators, the grid oracles, and
 * experiment execution from JSON text.
 */
#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qtube/experiments.hpp"
#include "qtube/history.hpp"
#include "qtube/oscillatory.hpp"
#include "qtube/pde.hpp"
#include "qtube/sliced.hpp"

namespace py = pybind11;
using namespace qtube;

namespace {

RadiusProfile make_profile(const std::string& kind,
                           const std::map<std::string, double>& params, double mu,
                           double nu) {
  return RadiusProfile(profile_kind_from_string(kind), params, mu, nu);
}

TubeGeometry make_tube(const RadiusProfile& p, double x_min, double x_max) {
  return TubeGeometry{p, 1, 2 * 3.14159265358979323846, x_min, x_max};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "quantum dynamics on a tube with a position-dependent fibre radius";

  py::class_<RadiusProfile>(m, "RadiusProfile")
      .def(py::init(&make_profile), py::arg("kind"), py::arg("parameters"),
           py::arg("history_coupling") = 0.0, py::arg("history_coupling_quad") = 0.0)
      .def("b", &RadiusProfile::b, py::arg("x"), py::arg("eta") = 0.0)
      .def("db", &RadiusProfile::db, py::arg("x"), py::arg("eta") = 0.0)
      .def("d2b", &RadiusProfile::d2b, py::arg("x"), py::arg("eta") = 0.0)
      .def("deta_ln_b", &RadiusProfile::deta_ln_b, py::arg("eta"));

  py::class_<TubeGeometry>(m, "TubeGeometry")
      .def(py::init(&make_tube), py::arg("profile"), py::arg("x_min") = -1e9,
           py::arg("x_max") = 1e9)
      .def_readonly("profile", &TubeGeometry::profile);

  py::class_<PhysicsConstants>(m, "PhysicsConstants")
      .def(py::init([](double mass, double hbar, double xi) {
             PhysicsConstants c;
             c.mass = mass;
             c.hbar = hbar;
             c.xi = xi;
             return c;
           }),
           py::arg("mass") = 1.0, py::arg("hbar") = 1.0, py::arg("xi") = 0.0)
      .def_readwrite("mass", &PhysicsConstants::mass)
      .def_readwrite("hbar", &PhysicsConstants::hbar)
      .def_readwrite("xi", &PhysicsConstants::xi);

  m.def("scalar_curvature", &scalar_curvature, py::arg("geom"), py::arg("x"),
        py::arg("eta") = 0.0);
  m.def(
      "world_function_taylor",
      [](const TubeGeometry& g, double x, double x_prime, double dphi, int winding,
         double eta) {
        return world_function_taylor(g, {x, x_prime, dphi, winding}, eta);
      },
      py::arg("geom"), py::arg("x"), py::arg("x_prime"), py::arg("delta_phi"),
      py::arg("winding") = 0, py::arg("eta") = 0.0);
  m.def(
      "world_function_geodesic",
      [](const TubeGeometry& g, double x, double x_prime, double dphi, int winding) {
        return world_function_geodesic(g, {x, x_prime, dphi, winding});
      },
      py::arg("geom"), py::arg("x"), py::arg("x_prime"), py::arg("delta_phi"),
      py::arg("winding") = 0);
  m.def("min_winding_sigma", &min_winding_sigma, py::arg("geom"), py::arg("x"),
        py::arg("x_prime"), py::arg("delta_phi"), py::arg("w_max") = 2,
        py::arg("use_geodesic") = true);

  m.def("capacity_S", &capacity_S, py::arg("geom"), py::arg("x"),
        py::arg("cell_scale"), py::arg("d"), py::arg("eta") = 0.0);
  m.def("delta_v_eff_from_b", &delta_v_eff_from_b, py::arg("geom"),
        py::arg("constants"), py::arg("x"), py::arg("d"), py::arg("eta") = 0.0);
  m.def(
      "delta_v_eff_from_S",
      [](const std::function<double(double)>& S, const PhysicsConstants& c, double x,
         int d, double fd_step) {
        return delta_v_eff_from_S(S, c, x, d, nullptr, nullptr, fd_step);
      },
      py::arg("S"), py::arg("constants"), py::arg("x"), py::arg("d"),
      py::arg("fd_step") = 1e-4);
  m.def("classical_effective_potential", &classical_effective_potential,
        py::arg("geom"), py::arg("constants"), py::arg("x"), py::arg("E_phi"),
        py::arg("eta") = 0.0);

  m.def(
      "eigenvalue",
      [](double hbar, double mass, int k) {
        ModeBasis b{2 * 3.14159265358979323846, hbar, mass, std::abs(k)};
        return eigenvalue(b, k);
      },
      py::arg("hbar"), py::arg("mass"), py::arg("k"));

  m.def(
      "short_time_full",
      [](const TubeGeometry& g, const PhysicsConstants& c, double x_later,
         double x_earlier, double dphi, double eps, int w_max, bool taper) {
        return short_time_full(g, c, x_later, x_earlier, dphi, eps, {},
                               WindingOptions{w_max, taper, nullptr});
      },
      py::arg("geom"), py::arg("constants"), py::arg("x_later"),
      py::arg("x_earlier"), py::arg("delta_phi"), py::arg("eps"),
      py::arg("w_max") = 2, py::arg("taper") = false);
  m.def(
      "short_time_mode",
      [](const TubeGeometry& g, const PhysicsConstants& c, int k, double x_later,
         double x_earlier, double eps) {
        return short_time_mode(g, c, k, x_later, x_earlier, eps);
      },
      py::arg("geom"), py::arg("constants"), py::arg("k"), py::arg("x_later"),
      py::arg("x_earlier"), py::arg("eps"));

  m.def(
      "semiclassical_action",
      [](const std::vector<double>& xs, double eps, const TubeGeometry& g,
         const PhysicsConstants& c, double E_phi, bool include_delta_v) {
        DiscretePath p{eps, xs, {}};
        return semiclassical_action(p, g, c, E_phi, include_delta_v);
      },
      py::arg("path_x"), py::arg("eps"), py::arg("geom"), py::arg("constants"),
      py::arg("E_phi"), py::arg("include_delta_v") = true);
  m.def("history_measure_factor", &history_measure_factor, py::arg("geom"),
        py::arg("x"), py::arg("eta"), py::arg("eps"), py::arg("f_value"),
        py::arg("d"));
  m.def(
      "eta_of_path",
      [](const std::vector<double>& xs, double eps,
         const std::function<double(double)>& f) {
        DiscretePath p{eps, xs, {}};
        return eta_of_path(p, f);
      },
      py::arg("path_x"), py::arg("eps"), py::arg("f"));
  m.def("gaussian_moment_residual", &gaussian_moment_residual, py::arg("geom"),
        py::arg("constants"), py::arg("x"), py::arg("eps"));
  m.def("fit_convergence_order", &fit_convergence_order, py::arg("h_e_pairs"));

  m.def(
      "evolve_reduced_1d",
      [](const std::vector<Complex>& psi, double x_min, double x_max,
         const TubeGeometry& g, const PhysicsConstants& c, double E_phi, double dt,
         int steps, bool include_delta_v) {
        WaveField1D f;
        f.grid = make_grid(x_min, x_max, static_cast<int>(psi.size()));
        f.v = psi;
        return evolve_reduced_1d(f, g, c, E_phi, dt, steps, include_delta_v).v;
      },
      py::arg("psi"), py::arg("x_min"), py::arg("x_max"), py::arg("geom"),
      py::arg("constants"), py::arg("E_phi"), py::arg("dt"), py::arg("steps"),
      py::arg("include_delta_v") = true);
  m.def(
      "reduced_propagator_matrix",
      [](const TubeGeometry& g, const PhysicsConstants& c, int k, double x_min,
         double x_max, int n, double T, int N) {
        KernelMatrix K = reduced_path_propagator(g, c, k, make_grid(x_min, x_max, n),
                                                 T, N);
        return K.K;
      },
      py::arg("geom"), py::arg("constants"), py::arg("k"), py::arg("x_min"),
      py::arg("x_max"), py::arg("n"), py::arg("T"), py::arg("N"));

  m.def(
      "brute_force_full",
      [](const TubeGeometry& g, const PhysicsConstants& c, double x_min,
         double x_max, int n_x, int n_phi, double x_f, double phi_f, double x_0,
         double phi_0, double T, int N, int w_max, bool taper,
         const std::function<double(double)>& f, long long budget) {
        BruteForceSpec s;
        s.x_grid = make_grid(x_min, x_max, n_x);
        s.n_phi = n_phi;
        s.x_f = x_f;
        s.phi_f = phi_f;
        s.x_0 = x_0;
        s.phi_0 = phi_0;
        s.T = T;
        s.N = N;
        s.windings.w_max = w_max;
        s.windings.taper = taper;
        s.budget = budget;
        if (f) s.dynamics = PathDynamics::history_(f);
        return brute_force_full(g, c, s);
      },
      py::arg("geom"), py::arg("constants"), py::arg("x_min"), py::arg("x_max"),
      py::arg("n_x"), py::arg("n_phi"), py::arg("x_f"), py::arg("phi_f"),
      py::arg("x_0"), py::arg("phi_0"), py::arg("T"), py::arg("N"),
      py::arg("w_max") = 2, py::arg("taper") = false,
      py::arg("f") = std::function<double(double)>(),
      py::arg("budget") = 10000000LL);
  m.def(
      "history_reduced_brute_force",
      [](const TubeGeometry& g, const PhysicsConstants& c, int k, double x_min,
         double x_max, int n_x, double x_f, double x_0, double T, int N,
         const std::function<double(double)>& f, bool per_path_endpoints,
         long long budget) {
        const PathDynamics dyn =
            f ? PathDynamics::history_(f) : PathDynamics::static_case_();
        return history_reduced_brute_force(
            g, c, k, make_grid(x_min, x_max, n_x), x_f, x_0, T, N, dyn,
            per_path_endpoints ? EndpointWeight::per_path : EndpointWeight::none,
            budget);
      },
      py::arg("geom"), py::arg("constants"), py::arg("k"), py::arg("x_min"),
      py::arg("x_max"), py::arg("n_x"), py::arg("x_f"), py::arg("x_0"),
      py::arg("T"), py::arg("N"), py::arg("f") = std::function<double(double)>(),
      py::arg("per_path_endpoints") = true, py::arg("budget") = 10000000LL);
  m.def(
      "run_experiment_json",
      [](const std::string& json_text, const std::string& out_dir) {
        ExperimentSpec spec = parse_spec(json_text);
        ExperimentReport rep = run(spec, out_dir);
        py::dict d;
        d["name"] = rep.name;
        d["all_passed"] = rep.all_passed();
        py::dict metrics;
        for (const auto& [k, v] : rep.metrics) metrics[py::str(k)] = v;
        d["metrics"] = metrics;
        py::list crits;
        for (const auto& cr : rep.criteria) {
          py::dict cd;
          cd["name"] = cr.name;
          cd["metric"] = cr.metric;
          cd["tolerance"] = cr.tolerance;
          cd["passed"] = cr.passed;
          crits.append(cd);
        }
        d["criteria"] = crits;
        d["artifacts"] = rep.artifacts;
        return d;
      },
      py::arg("json_text"), py::arg("out_dir") = "./out");
  m.def("validate_experiment_json",
        [](const std::string& json_text) { parse_spec(json_text); });
}
