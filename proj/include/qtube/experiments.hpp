#ifndef QTUBE_EXPERIMENTS_HPP
#define QTUBE_EXPERIMENTS_HPP

#include <map>
#include <string>
#include <vector>

#include "qtube/kernels.hpp"
#include "qtube/spectral.hpp"

namespace qtube {

enum class ScenarioKind {
  oracle_compare,
  ehrenfest,
  slicing_convergence,
  brute_force_equivalence,
  history_equivalence,
  moment_identity,
  xi_scan
};

ScenarioKind scenario_kind_from_string(const std::string& s);
std::string to_string(ScenarioKind k);

/// Declarative scenario parsed from JSON. Everything is deterministic; there
/// are no seeds. Tolerances live here, not in code.
struct ExperimentSpec {
  std::string name;
  ScenarioKind scenario = ScenarioKind::oracle_compare;
  std::string variant;  // sub-case within the scenario kind
  PhysicsConstants constants;
  RadiusProfile profile;
  // grids
  double x_min = -12.0, x_max = 12.0;
  int n_x = 256;
  int n_phi = 64;
  double dt = 5e-3;
  double T = 2.0;
  int N = 4;  // slices for lattice scenarios
  int mode_k = 0;
  // packet
  double packet_sigma = 1.0, packet_x0 = 0.0, packet_p0 = 0.0;
  // lattice / brute force
  double bf_x_f = 0.0, bf_phi_f = 0.0, bf_x_0 = 0.0, bf_phi_0 = 0.0;
  long long budget = 10'000'000;
  int w_max = 2;
  // history
  std::vector<double> f_coeffs{0.0};  // f(x) = sum c_i x^i
  double eta_min = 0.0, eta_max = 1.0;
  int n_eta = 33;
  std::map<std::string, double> tolerances;
  std::string raw_json;  // resolved config echoed into the report
};

struct CriterionResult {
  std::string name;
  double metric = 0.0;
  double tolerance = 0.0;
  bool lower_is_pass = true;  // pass iff metric <= tolerance (else >=)
  bool passed = false;
};

struct ExperimentReport {
  std::string name;
  std::map<std::string, double> metrics;
  std::vector<CriterionResult> criteria;
  std::vector<std::string> artifacts;
  double wall_time_s = 0.0;
  bool all_passed() const;
};

/// Parse + validate a spec from JSON text. Throws std::invalid_argument with
/// a json-pointer-style path and the violated rule name.
ExperimentSpec parse_spec(const std::string& json_text);
ExperimentSpec load_spec_file(const std::string& path);

/// Validation rules (also run by parse_spec for scenario kinds that need them):
///   kinetic_phase_rule   m dx^2 / (2 hbar eps) <= pi/3
///   boundary_width_rule  domain width >= 8 packet widths
///   eta_advection_rule   f_max dt <= d eta
void validate_spec(const ExperimentSpec& spec);

ExperimentReport run(const ExperimentSpec& spec, const std::string& out_dir);

double compare_fields_l2(const std::vector<Complex>& a, const std::vector<Complex>& b);
double compare_fields_linf(const std::vector<Complex>& a, const std::vector<Complex>& b);

void write_report_json(const ExperimentReport& r, const std::string& path);

/// Names of the scenario spec files shipped under specs/ (the acceptance set).
std::vector<std::string> builtin_spec_files();

}  // namespace qtube

#endif
