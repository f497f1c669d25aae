#pragma once

#include <stdexcept>

namespace mmdg {

struct Primitive1D {
  double rho = 1.0;
  double u = 0.0;
  double p = 1.0;
};

/// Exact solution of the 1D Euler Riemann problem (ideal gas). The star
/// pressure solves f_L(p) + f_R(p) + u_R - u_L = 0 by Newton iteration.
class ExactRiemann {
 public:
  ExactRiemann(Primitive1D left, Primitive1D right, double gamma = 1.4);

  double p_star() const { return p_star_; }
  double u_star() const { return u_star_; }
  double rho_star_left() const { return rho_star_l_; }
  double rho_star_right() const { return rho_star_r_; }
  /// Absolute residual of the pressure function at the star pressure.
  double pressure_residual() const;

  /// Solution at similarity coordinate s = (x - x0) / t.
  Primitive1D sample(double s) const;
  Primitive1D sample(double x, double t, double x0 = 0.0) const;

 private:
  double f(double p, const Primitive1D& w, double c, double& df) const;
  double star_density(double p, const Primitive1D& w) const;

  Primitive1D l_, r_;
  double g_;
  double cl_, cr_;
  double p_star_ = 0.0, u_star_ = 0.0;
  double rho_star_l_ = 0.0, rho_star_r_ = 0.0;
};

}  // namespace mmdg
