#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmdg/dg_space.hpp"
#include "mmdg/flux.hpp"
#include "mmdg/limiter.hpp"
#include "mmdg/mmpde.hpp"
#include "mmdg/riemann.hpp"
#include "mmdg/solver.hpp"
#include "mmdg/stability_lab.hpp"

namespace mmdg {

struct ExperimentConfig {
  std::string problem = "burgers1d";
  int n = 0;  // 1D cells; 0 selects the problem default
  int nx = 0, ny = 0;
  int degree = 1;
  std::optional<double> c_cfl;  // default follows the degree
  std::string preset = "ee";    // CFL letter first
  bool allow_unstable = false;  // admit presets whose CFL alpha can fall below the flux alpha
  std::optional<double> t_end;
  int outputs = 10;
  unsigned seed = 1;
  bool adapt = true;
  std::optional<bool> limiter;  // default: on for k >= 1
  double tvb_m = 0.0;
  bool characteristic = true;
  MmpdeParams mmpde;
  double dt_max = std::numeric_limits<double>::infinity();
  double dt_min = 1e-13;
  bool audit = false;
  long max_steps = -1;
  StabilityConfig stability;  // p0_linear_stability only
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& c);
/// Fills problem defaults (resolution, final time, CFL number).
ExperimentConfig resolve(const ExperimentConfig& c);

struct ProblemSetup {
  std::shared_ptr<const SimplicialMesh> mesh;
  std::shared_ptr<const FluxModel> model;
  StateFunction initial;
  MetricSource metric = MetricSource::scalar;
  double t_end = 1.0;
};

/// Initial data in conserved variables for a problem id.
StateFunction initial_condition(const std::string& problem);
double default_t_end(const std::string& problem);
ProblemSetup make_problem(const ExperimentConfig& resolved);
/// Left/right primitive states of the 1D tube problems.
std::pair<Primitive1D, Primitive1D> tube_states(const std::string& problem);

struct RunResult {
  int exit_code = 0;  // 0 completed, 2 instability report
  std::string report;
  double t_final = 0.0;
  std::vector<StepRecord> log;
  std::shared_ptr<const SimplicialMesh> mesh;
  std::shared_ptr<const FluxModel> model;
  std::shared_ptr<const DGSpace> space;
  DGField u;
  std::vector<Vec2> x;
  std::vector<double> initial_mass;
  std::vector<double> final_mass;
  std::vector<double> outflow;
  double min_measure = std::numeric_limits<double>::infinity();
  std::vector<StepAudit> audits;  // kept in memory when config.audit is set
  std::optional<StabilityReport> stability;
};

/// Runs one experiment; writes CSV/snapshot artifacts when output_dir is not empty.
RunResult run_experiment(const ExperimentConfig& config, const std::string& output_dir = "");

/// Relative drift |M(T) + outflow - M(0)| / |M(0)| per component.
std::vector<double> mass_drift(const RunResult& r);

/// sum_K int_K |rho_h - rho_exact(x, T)| for a tube problem.
double tube_density_l1_error(const RunResult& r, const std::string& problem);
/// sum_K int_K |u_h - u_exact(x, T)| against the characteristic solution.
double burgers_l1_error(const RunResult& r);

/// Per-step dt under two CFL policies replayed on the same recorded mesh
/// trajectory and alpha tables.
struct DtComparison {
  std::vector<double> t;
  std::vector<double> dt_edge;
  std::vector<double> dt_global;
};
DtComparison compare_dt_policies(const RunResult& recorded, double c_cfl);

struct VerifyReport {
  bool ok = true;
  int steps_checked = 0;
  std::vector<std::string> messages;
};
/// Recomputes dt and invariants from the artifacts of a run directory.
VerifyReport verify_run(const std::string& run_dir);

}  // namespace mmdg
