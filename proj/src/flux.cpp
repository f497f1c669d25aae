#include "mmdg/flux.hpp"

#include <cmath>

namespace mmdg {

void FluxModel::eigenvectors(const State& /*u*/, const Vec2& /*n*/, SquareMatrix& left, SquareMatrix& right) const {
  left = SquareMatrix::Identity(components(), components());
  right = left;
}

FluxMatrix modified_flux(const FluxModel& model, const State& u, const Vec2& x, double t, const Vec2& xdot) {
  FluxMatrix h = model.flux(u, x, t);
  h.col(0) -= u * xdot.x();
  if (model.dim() == 2) h.col(1) -= u * xdot.y();
  return h;
}

State lf_flux(const FluxModel& model, const State& u_int, const State& u_ext, const Vec2& x, double t, const Vec2& n,
              const Vec2& xdot, double alpha) {
  const FluxMatrix hi = modified_flux(model, u_int, x, t, xdot);
  const FluxMatrix he = modified_flux(model, u_ext, x, t, xdot);
  State r = 0.5 * ((hi + he) * n - alpha * (u_ext - u_int));
  return r;
}

LinearAdvection::LinearAdvection(int dim, VelocityField a) : dim_(dim), a_(std::move(a)) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
}

FluxMatrix LinearAdvection::flux(const State& u, const Vec2& x, double t) const {
  const Vec2 a = a_(x, t);
  FluxMatrix f(1, 2);
  f(0, 0) = a.x() * u[0];
  f(0, 1) = dim_ == 2 ? a.y() * u[0] : 0.0;
  return f;
}

double LinearAdvection::max_abs_eig(const State&, const Vec2& x, double t, const Vec2& n, const Vec2& xdot) const {
  Vec2 rel = a_(x, t) - xdot;
  if (dim_ == 1) rel.y() = 0.0;
  return std::abs(rel.dot(n));
}

Burgers::Burgers(int dim) : dim_(dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
}

FluxMatrix Burgers::flux(const State& u, const Vec2&, double) const {
  FluxMatrix f(1, 2);
  f(0, 0) = 0.5 * u[0] * u[0];
  f(0, 1) = dim_ == 2 ? f(0, 0) : 0.0;
  return f;
}

double Burgers::max_abs_eig(const State& u, const Vec2&, double, const Vec2& n, const Vec2& xdot) const {
  if (dim_ == 1) return std::abs((u[0] - xdot.x()) * n.x());
  return std::abs(u[0] * (n.x() + n.y()) - xdot.dot(n));
}

Euler::Euler(int dim, double gamma) : dim_(dim), gamma_(gamma) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
}

double Euler::pressure(const State& u) const {
  double kinetic = u[1] * u[1];
  if (dim_ == 2) kinetic += u[2] * u[2];
  return (gamma_ - 1.0) * (u[dim_ + 1] - 0.5 * kinetic / u[0]);
}

void Euler::check_state(const State& u) const {
  if (!(u[0] > 0.0) || !std::isfinite(u[0])) throw StateError("non-positive density");
  const double p = pressure(u);
  if (!(p > 0.0) || !std::isfinite(p)) throw StateError("non-positive pressure");
}

double Euler::sound_speed(const State& u) const {
  check_state(u);
  return std::sqrt(gamma_ * pressure(u) / u[0]);
}

double Euler::entropy(const State& u) const {
  check_state(u);
  return std::log(pressure(u) * std::pow(u[0], -gamma_));
}

State Euler::conserved(const State& w) const {
  State u(components());
  u[0] = w[0];
  double kinetic = 0.0;
  for (int i = 0; i < dim_; ++i) {
    u[1 + i] = w[0] * w[1 + i];
    kinetic += w[1 + i] * w[1 + i];
  }
  u[dim_ + 1] = w[dim_ + 1] / (gamma_ - 1.0) + 0.5 * w[0] * kinetic;
  return u;
}

State Euler::primitive(const State& u) const {
  State w(components());
  w[0] = u[0];
  for (int i = 0; i < dim_; ++i) w[1 + i] = u[1 + i] / u[0];
  w[dim_ + 1] = pressure(u);
  return w;
}

FluxMatrix Euler::flux(const State& u, const Vec2&, double) const {
  check_state(u);
  const double p = pressure(u);
  const double rho = u[0];
  const double vx = u[1] / rho;
  FluxMatrix f = FluxMatrix::Zero(components(), 2);
  if (dim_ == 1) {
    f(0, 0) = u[1];
    f(1, 0) = u[1] * vx + p;
    f(2, 0) = vx * (u[2] + p);
    return f;
  }
  const double vy = u[2] / rho;
  f(0, 0) = u[1];
  f(1, 0) = u[1] * vx + p;
  f(2, 0) = u[2] * vx;
  f(3, 0) = vx * (u[3] + p);
  f(0, 1) = u[2];
  f(1, 1) = u[1] * vy;
  f(2, 1) = u[2] * vy + p;
  f(3, 1) = vy * (u[3] + p);
  return f;
}

double Euler::max_abs_eig(const State& u, const Vec2&, double, const Vec2& n, const Vec2& xdot) const {
  const double c = sound_speed(u);
  Vec2 vel(u[1] / u[0], dim_ == 2 ? u[2] / u[0] : 0.0);
  Vec2 rel = vel - xdot;
  if (dim_ == 1) rel.y() = 0.0;
  return std::abs(rel.dot(n)) + c;
}

void Euler::eigenvectors(const State& u, const Vec2& n, SquareMatrix& left, SquareMatrix& right) const {
  const double c = sound_speed(u);
  const double rho = u[0];
  const int m = components();
  right.resize(m, m);
  if (dim_ == 1) {
    const double v = u[1] / rho;
    const double h = (u[2] + pressure(u)) / rho;
    right << 1.0, 1.0, 1.0, v - c, v, v + c, h - v * c, 0.5 * v * v, h + v * c;
  } else {
    const double vx = u[1] / rho;
    const double vy = u[2] / rho;
    const double h = (u[3] + pressure(u)) / rho;
    const double un = vx * n.x() + vy * n.y();
    const double tx = -n.y(), ty = n.x();
    const double ut = vx * tx + vy * ty;
    right << 1.0, 1.0, 0.0, 1.0,                              //
        vx - c * n.x(), vx, tx, vx + c * n.x(),               //
        vy - c * n.y(), vy, ty, vy + c * n.y(),               //
        h - c * un, 0.5 * (vx * vx + vy * vy), ut, h + c * un;
  }
  if (dim_ == 1) {
    left = Eigen::Matrix3d(right).inverse();
  } else {
    left = Eigen::Matrix4d(right).inverse();
  }
}

}  // namespace mmdg
