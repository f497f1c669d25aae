#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "mmdg/geometry.hpp"

namespace mmdg {

/// Conserved state, at most four components.
using State = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
/// Physical flux: one column per spatial direction (column 1 unused in 1D).
using FluxMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2, 0, 4, 2>;
using SquareMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

/// Raised for states outside the admissible set (e.g. negative density).
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A conservation law U_t + div F(U, x, t) = 0.
class FluxModel {
 public:
  virtual ~FluxModel() = default;

  virtual std::string name() const = 0;
  virtual int components() const = 0;
  virtual int dim() const = 0;

  virtual FluxMatrix flux(const State& u, const Vec2& x, double t) const = 0;
  /// Spectral radius of the Jacobian of (F - U xdot^T) n with respect to U.
  virtual double max_abs_eig(const State& u, const Vec2& x, double t, const Vec2& n, const Vec2& xdot) const = 0;
  /// Throws StateError for inadmissible states.
  virtual void check_state(const State& /*u*/) const {}

  /// Left/right eigenvectors of the normal flux Jacobian at u (rows of
  /// `left` are left eigenvectors). Scalar laws return 1x1 identities.
  virtual void eigenvectors(const State& u, const Vec2& n, SquareMatrix& left, SquareMatrix& right) const;
};

/// H = F - U xdot^T
FluxMatrix modified_flux(const FluxModel& model, const State& u, const Vec2& x, double t, const Vec2& xdot);

/// Lax-Friedrichs flux 1/2((H(U_int) + H(U_ext)) n - alpha (U_ext - U_int)).
State lf_flux(const FluxModel& model, const State& u_int, const State& u_ext, const Vec2& x, double t, const Vec2& n,
              const Vec2& xdot, double alpha);

/// a(x, t) U with a given velocity field.
class LinearAdvection final : public FluxModel {
 public:
  using VelocityField = std::function<Vec2(const Vec2&, double)>;
  LinearAdvection(int dim, VelocityField a);

  std::string name() const override { return "linear_advection"; }
  int components() const override { return 1; }
  int dim() const override { return dim_; }
  FluxMatrix flux(const State& u, const Vec2& x, double t) const override;
  double max_abs_eig(const State& u, const Vec2& x, double t, const Vec2& n, const Vec2& xdot) const override;
  Vec2 velocity(const Vec2& x, double t) const { return a_(x, t); }

 private:
  int dim_;
  VelocityField a_;
};

/// u^2/2 in every coordinate direction.
class Burgers final : public FluxModel {
 public:
  explicit Burgers(int dim);

  std::string name() const override { return dim_ == 1 ? "burgers1d" : "burgers2d"; }
  int components() const override { return 1; }
  int dim() const override { return dim_; }
  FluxMatrix flux(const State& u, const Vec2& x, double t) const override;
  double max_abs_eig(const State& u, const Vec2& x, double t, const Vec2& n, const Vec2& xdot) const override;

 private:
  int dim_;
};

/// Ideal-gas Euler equations, conserved variables (rho, rho u[, rho v], E).
class Euler final : public FluxModel {
 public:
  explicit Euler(int dim, double gamma = 1.4);

  std::string name() const override { return dim_ == 1 ? "euler1d" : "euler2d"; }
  int components() const override { return dim_ + 2; }
  int dim() const override { return dim_; }
  double gamma() const { return gamma_; }

  FluxMatrix flux(const State& u, const Vec2& x, double t) const override;
  double max_abs_eig(const State& u, const Vec2& x, double t, const Vec2& n, const Vec2& xdot) const override;
  void check_state(const State& u) const override;
  void eigenvectors(const State& u, const Vec2& n, SquareMatrix& left, SquareMatrix& right) const override;

  double pressure(const State& u) const;
  double sound_speed(const State& u) const;
  /// Primitive (rho, u[, v], P) to conserved.
  State conserved(const State& primitive) const;
  State primitive(const State& u) const;
  /// ln(P rho^-gamma)
  double entropy(const State& u) const;

 private:
  int dim_;
  double gamma_;
};

}  // namespace mmdg
