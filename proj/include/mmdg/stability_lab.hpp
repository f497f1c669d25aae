#pragma once

#include <string>
#include <vector>

#include "mmdg/cfl.hpp"
#include "mmdg/flux.hpp"

namespace mmdg {

/// P0 / explicit Euler linear advection on a periodic box with a prescribed
/// oscillating mesh and the step size at the weighted-alpha L1 bound (equality).
struct StabilityConfig {
  int dim = 1;
  int n = 50;  // cells per direction
  /// "const" (a = 1 or (1, 0.5)), "varying" (1 + 0.5 sin(2 pi x) sin t),
  /// "peaked" (strongly varying local speed) or "random" (seeded).
  std::string velocity = "const";
  PolicyPair pairing;
  int steps = 500;
  double amplitude = 0.3;  // in units of the uniform spacing
  double omega = 2.0 * 3.14159265358979323846;
  int mode = 2;  // spatial wave number of the 1D motion
  unsigned seed = 1;
};

struct StabilityReport {
  std::vector<double> l1;    // l1[0] is the initial value
  std::vector<double> dt;
  std::vector<double> mass;
  bool monotone = true;        // l1[n+1] <= l1[n] + 1e-12 l1[0] for every step
  double worst_increase = 0.0; // largest l1[n+1] - l1[n], relative to l1[0]
  double worst_mass_drift = 0.0;
  bool dominance_ok = true;    // alpha_CFL >= alpha_LF at every Gauss point of every step
  DominanceResult first_violation;
  int violation_step = -1;
};

/// Velocity field used by the laboratory.
LinearAdvection::VelocityField stability_velocity(const std::string& name, int dim, unsigned seed);

StabilityReport stability_lab(const StabilityConfig& config);

}  // namespace mmdg
