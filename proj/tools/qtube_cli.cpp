/* Command-line front end: validate configs, run experiment specs, list the
 * shipped scenarios, and evaluate single formulas for spot checks.
 *   qtube run [specs...] [--out DIR] [--jobs N] [--quiet]
 *   qtube validate specs...
 *   qtube list
 *   qtube eval {delta_v|v_cl|curvature|sigma} --profile kind:k=v,... [options]
 * Exit codes: 0 pass, 1 criterion failure, 2 usage or config error.
 */
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qtube/experiments.hpp"
#include "qtube/history.hpp"
#include "qtube/sliced.hpp"

namespace fs = std::filesystem;
using namespace qtube;

#ifndef QTUBE_SPEC_DIR
#define QTUBE_SPEC_DIR "specs"
#endif

namespace {

// compact profile grammar for eval: kind:key=value,key=value
RadiusProfile parse_profile_arg(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind_s = text.substr(0, colon);
  std::map<std::string, double> params;
  double mu = 0.0, nu = 0.0;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("profile parameter needs key=value: " + item);
      const std::string key = item.substr(0, eq);
      const double val = std::stod(item.substr(eq + 1));
      if (key == "mu")
        mu = val;
      else if (key == "nu")
        nu = val;
      else if (key == "b" || key == "b0")
        params["b0"] = val;
      else
        params[key] = val;
    }
  }
  return RadiusProfile(profile_kind_from_string(kind_s), params, mu, nu);
}

int run_specs(const std::vector<std::string>& paths, const std::string& out_dir,
              int jobs, bool quiet, const std::string& spec_dir) {
  std::vector<std::string> resolved;
  for (const std::string& p : paths) {
    if (fs::exists(p)) {
      resolved.push_back(p);
    } else if (fs::exists(fs::path(spec_dir) / p)) {
      resolved.push_back((fs::path(spec_dir) / p).string());
    } else if (fs::exists(fs::path(spec_dir) / (p + ".json"))) {
      resolved.push_back((fs::path(spec_dir) / (p + ".json")).string());
    } else {
      std::cerr << "unknown scenario or missing file: " << p << "\n";
      return 2;
    }
  }

  std::vector<ExperimentSpec> specs;
  for (const std::string& p : resolved) {
    try {
      specs.push_back(load_spec_file(p));
    } catch (const std::exception& e) {
      std::cerr << p << ": " << e.what() << "\n";
      return 2;
    }
  }

  std::vector<ExperimentReport> reports(specs.size());
  if (jobs > 1) {
    std::vector<std::future<ExperimentReport>> futs;
    futs.reserve(specs.size());
    for (const auto& s : specs)
      futs.push_back(std::async(std::launch::async,
                                [&s, &out_dir] { return run(s, out_dir); }));
    for (size_t i = 0; i < futs.size(); ++i) reports[i] = futs[i].get();
  } else {
    for (size_t i = 0; i < specs.size(); ++i) reports[i] = run(specs[i], out_dir);
  }

  bool all_ok = true;
  for (const auto& r : reports) {
    for (const auto& cr : r.criteria) {
      all_ok = all_ok && cr.passed;
      if (!quiet)
        std::printf("%-4s %s/%s  metric=%.6g  %s %.6g\n",
                    cr.passed ? "PASS" : "FAIL", r.name.c_str(), cr.name.c_str(),
                    cr.metric, cr.lower_is_pass ? "<=" : ">=", cr.tolerance);
    }
    if (!quiet)
      std::printf("%s: %s (%.1f s)\n", r.name.c_str(),
                  r.all_passed() ? "all criteria passed" : "FAILURES", r.wall_time_s);
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical experiments for quantum dynamics on a shrinking tube"};
  app.require_subcommand(1);

  std::string out_dir = "./out";
  std::string spec_dir = QTUBE_SPEC_DIR;
  int jobs = 1;
  bool quiet = false;

  auto* run_cmd = app.add_subcommand("run", "run experiment specs");
  std::vector<std::string> run_paths;
  run_cmd->add_option("specs", run_paths, "spec files or shipped scenario names")
      ->required();
  run_cmd->add_option("--out", out_dir, "output directory (default ./out)");
  run_cmd->add_option("--jobs", jobs, "parallel specs");
  run_cmd->add_flag("--quiet", quiet, "suppress per-criterion lines");
  run_cmd->add_option("--spec-dir", spec_dir, "directory with shipped scenarios");

  auto* val_cmd = app.add_subcommand("validate", "validate spec files");
  std::vector<std::string> val_paths;
  val_cmd->add_option("specs", val_paths, "spec files")->required();

  auto* list_cmd = app.add_subcommand("list", "list shipped scenarios");
  list_cmd->add_option("--spec-dir", spec_dir, "directory with shipped scenarios");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a single formula");
  std::string formula, profile_arg = "const:b=1";
  double xi = 0.0, x = 0.0, x_prime = 0.0, dphi = 0.0, E_phi = 0.0, eta = 0.0;
  int d = 1, winding = 0;
  bool use_geodesic = false;
  eval_cmd->add_option("formula", formula, "delta_v | v_cl | curvature | sigma")
      ->required();
  eval_cmd->add_option("--profile", profile_arg, "kind:key=value,... (e.g. exp:lambda=1)");
  eval_cmd->add_option("--xi", xi, "curvature coupling");
  eval_cmd->add_option("--x", x, "evaluation point");
  eval_cmd->add_option("--x-prime", x_prime, "second point (sigma)");
  eval_cmd->add_option("--dphi", dphi, "angular separation (sigma)");
  eval_cmd->add_option("--winding", winding, "winding number (sigma)");
  eval_cmd->add_option("--d", d, "fibre dimension");
  eval_cmd->add_option("--E-phi", E_phi, "fibre energy (v_cl)");
  eval_cmd->add_option("--eta", eta, "history accumulator value");
  eval_cmd->add_flag("--geodesic", use_geodesic, "sigma via the geodesic solver");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run_specs(run_paths, out_dir, jobs, quiet, spec_dir);

    if (val_cmd->parsed()) {
      bool ok = true;
      for (const std::string& p : val_paths) {
        try {
          load_spec_file(p);
          std::printf("%s: OK\n", p.c_str());
        } catch (const std::exception& e) {
          std::printf("%s: REJECTED: %s\n", p.c_str(), e.what());
          ok = false;
        }
      }
      return ok ? 0 : 2;
    }

    if (list_cmd->parsed()) {
      for (const std::string& f : builtin_spec_files()) {
        const fs::path p = fs::path(spec_dir) / f;
        std::string scenario = "?";
        try {
          ExperimentSpec s = load_spec_file(p.string());
          scenario = to_string(s.scenario) +
                     (s.variant.empty() ? "" : "/" + s.variant);
        } catch (...) {
        }
        std::printf("%-30s %s\n", f.c_str(), scenario.c_str());
      }
      return 0;
    }

    if (eval_cmd->parsed()) {
      const RadiusProfile prof = parse_profile_arg(profile_arg);
      TubeGeometry g{prof, d, 2 * 3.14159265358979323846, -1e9, 1e9};
      PhysicsConstants c;
      c.xi = xi;
      double value = 0.0;
      if (formula == "delta_v")
        value = delta_v_eff_from_b(g, c, x, d, eta);
      else if (formula == "v_cl")
        value = classical_effective_potential(g, c, x, E_phi, eta);
      else if (formula == "curvature")
        value = scalar_curvature(g, x, eta);
      else if (formula == "sigma") {
        WorldPointPair pair{x, x_prime, dphi, winding};
        value = use_geodesic ? world_function_geodesic(g, pair)
                             : world_function_taylor(g, pair, eta);
      } else {
        std::cerr << "unknown formula: " << formula << "\n";
        return 2;
      }
      std::printf("%.12g\n", value + 0.0 == 0.0 ? 0.0 : value);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
