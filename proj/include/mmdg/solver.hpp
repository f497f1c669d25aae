#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmdg/alpha.hpp"
#include "mmdg/cfl.hpp"
#include "mmdg/dg_space.hpp"
#include "mmdg/flux.hpp"
#include "mmdg/limiter.hpp"
#include "mmdg/metric.hpp"
#include "mmdg/mmpde.hpp"

namespace mmdg {

/// Raised when a run cannot continue: time step collapse, nonphysical
/// state or mesh failure. The message is the instability report.
struct InstabilityError : std::runtime_error {
  InstabilityError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
  double time;
};

/// d/dt (|K| c_{K,i}) for every element, component and mode:
/// |K| sum_G w_G H . grad(phi_i) - sum_e |e| sum_G w_G phi_i Hhat.
/// `velocity` holds nodal mesh velocities (empty means stationary). When
/// `boundary_flux` is given it receives the net outflow of each component
/// through boundary faces.
void residual(const DGSpace& space, const FluxModel& model, const DGField& u, std::span<const Vec2> x,
              std::span<const Vec2> velocity, double t, const AggregatedAlpha& alpha_lf, DGField& out,
              std::vector<double>* boundary_flux = nullptr);

/// Hooks called after each stage: optional limiter and admissibility check.
struct StagePost {
  const LimiterSpec* limiter = nullptr;
  const FluxModel* model = nullptr;
  bool check_states = true;
};

/// |K^{n+1}| U^{n+1} = |K^n| U^n + dt L(U^n; x^n). Returns the boundary
/// outflow per component integrated over the step.
std::vector<double> euler_step(const DGSpace& space, const FluxModel& model, DGField& u, const MovingMesh& mm,
                               const AggregatedAlpha& alpha_lf, const StagePost& post = {});
/// Same, restricted to k = 0 (the scheme with the L1 guarantee).
std::vector<double> euler_step_p0(const DGSpace& space, const FluxModel& model, DGField& u, const MovingMesh& mm,
                                  const AggregatedAlpha& alpha_lf);
/// Shu-Osher SSP-RK3 on |K(t)| c with geometry at t_n, t_{n+1}, t_{n+1/2}.
std::vector<double> ssp_rk3_step(const DGSpace& space, const FluxModel& model, DGField& u, const MovingMesh& mm,
                                 const AggregatedAlpha& alpha_lf, const StagePost& post = {});

/// sum_K |K| |mean of component c|
double l1_norm(const SimplicialMesh& mesh, std::span<const Vec2> x, const DGField& u, int c = 0);
/// sum_K |K| mean of component c
double total_mass(const SimplicialMesh& mesh, std::span<const Vec2> x, const DGField& u, int c = 0);
/// Throws StateError when a cell average is inadmissible.
void check_cell_averages(const FluxModel& model, const DGField& u);

/// Metric and MMPDE stage: produces the target mesh for the next step.
class MeshMotion {
 public:
  virtual ~MeshMotion() = default;
  virtual std::vector<Vec2> target(const DGSpace& space, const DGField& u, std::span<const Vec2> x, double t,
                                   double dt_tilde) = 0;
  virtual bool stationary() const { return false; }
};

class StationaryMotion final : public MeshMotion {
 public:
  std::vector<Vec2> target(const DGSpace&, const DGField&, std::span<const Vec2> x, double, double) override {
    return {x.begin(), x.end()};
  }
  bool stationary() const override { return true; }
};

class PrescribedMotion final : public MeshMotion {
 public:
  using Fn = std::function<std::vector<Vec2>(std::span<const Vec2> x, double t, double dt_tilde)>;
  explicit PrescribedMotion(Fn fn) : fn_(std::move(fn)) {}
  std::vector<Vec2> target(const DGSpace&, const DGField&, std::span<const Vec2> x, double t,
                           double dt_tilde) override {
    return fn_(x, t, dt_tilde);
  }

 private:
  Fn fn_;
};

/// Which solution quantities drive the metric.
enum class MetricSource { scalar, density_entropy };

/// Metric from recovered Hessians of the solution; the density/entropy
/// source intersects the two metrics after global normalization.
MetricField solution_metric(const HessianRecovery& recovery, const SimplicialMesh& mesh, const FluxModel& model,
                            const DGField& u, std::span<const Vec2> x, MetricSource source, int n_smooth);

class MmpdeMotion final : public MeshMotion {
 public:
  MmpdeMotion(const SimplicialMesh& mesh, const FluxModel& model, MetricSource source, MmpdeParams params,
              std::vector<Vec2> xi);
  std::vector<Vec2> target(const DGSpace& space, const DGField& u, std::span<const Vec2> x, double t,
                           double dt_tilde) override;
  const MetricField& last_metric() const { return metric_; }

 private:
  const SimplicialMesh* mesh_;
  const FluxModel* model_;
  MetricSource source_;
  MmpdeParams params_;
  std::vector<Vec2> xi_;
  HessianRecovery recovery_;
  MetricField metric_;
};

enum class Integrator { euler_p0, ssp_rk3 };

struct SolverConfig {
  CflConfig cfl;
  LimiterSpec limiter;
  Integrator integrator = Integrator::ssp_rk3;
  double dt_min = 1e-13;
  int max_dt_halvings = 30;
};

/// One row of the run log.
struct StepRecord {
  int n = 0;
  double t = 0.0;  // time at the end of the step
  double dt = 0.0;
  double dt_tilde = 0.0;
  double l1 = 0.0;
  double mass = 0.0;
  double min_measure = 0.0;
  double min_sigma = 0.0;
  int argmax_element = -1;
  bool dominance_ok = true;
  std::string cap_reason = "none";
  int halvings = 0;
};

/// Time-step data kept for offline verification.
struct StepAudit {
  std::vector<Vec2> x_old;
  std::vector<Vec2> x_target;
  AlphaTable alpha;  // pointwise table with the mesh velocity, before aggregation
  std::vector<double> face_alpha_cfl;
  double dt_formula = 0.0;
};

/// Quasi-Lagrange moving-mesh DG driver.
class MmdgSolver {
 public:
  MmdgSolver(const DGSpace& space, const FluxModel& model, SolverConfig config, MeshMotion& motion,
             std::vector<Vec2> x0, DGField u0, double t0 = 0.0);

  /// Advances one step without passing t_stop. `stop_reason` labels the cap
  /// when t_stop limits the step.
  StepRecord advance(double t_stop, const std::string& stop_reason = "t_end");

  const DGField& field() const { return u_; }
  const std::vector<Vec2>& positions() const { return x_; }
  double time() const { return t_; }
  int steps() const { return n_; }
  /// Cumulative outflow of each component through boundary faces.
  const std::vector<double>& boundary_outflow() const { return outflow_; }
  /// alpha_LF table frozen for the last step (identical for all stages).
  const AlphaTable& frozen_alpha() const { return frozen_; }
  const StepAudit& last_audit() const { return audit_; }
  void set_audit(bool on) { audit_on_ = on; }

 private:
  const DGSpace* space_;
  const FluxModel* model_;
  SolverConfig config_;
  MeshMotion* motion_;
  std::vector<Vec2> x_;
  DGField u_;
  double t_;
  int n_ = 0;
  std::vector<double> outflow_;
  AlphaTable frozen_;
  StepAudit audit_;
  bool audit_on_ = false;
};

}  // namespace mmdg
