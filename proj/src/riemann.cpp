#include "mmdg/riemann.hpp"

#include <algorithm>
#include <cmath>

namespace mmdg {

ExactRiemann::ExactRiemann(Primitive1D left, Primitive1D right, double gamma) : l_(left), r_(right), g_(gamma) {
  if (!(l_.rho > 0.0 && r_.rho > 0.0 && l_.p > 0.0 && r_.p > 0.0)) {
    throw std::invalid_argument("Riemann data must have positive density and pressure");
  }
  cl_ = std::sqrt(g_ * l_.p / l_.rho);
  cr_ = std::sqrt(g_ * r_.p / r_.rho);
  if (2.0 / (g_ - 1.0) * (cl_ + cr_) <= r_.u - l_.u) {
    throw std::invalid_argument("Riemann data generates vacuum; not supported");
  }
  // two-rarefaction guess, then Newton
  const double z = (g_ - 1.0) / (2.0 * g_);
  double p = std::pow((cl_ + cr_ - 0.5 * (g_ - 1.0) * (r_.u - l_.u)) /
                          (cl_ / std::pow(l_.p, z) + cr_ / std::pow(r_.p, z)),
                      1.0 / z);
  p = std::max(p, 1e-14);
  for (int it = 0; it < 100; ++it) {
    double dl, dr;
    const double res = f(p, l_, cl_, dl) + f(p, r_, cr_, dr) + r_.u - l_.u;
    double next = p - res / (dl + dr);
    if (next <= 0.0) next = 0.1 * p;
    const bool done = std::abs(next - p) <= 1e-15 * (next + p);
    p = next;
    if (done) break;
  }
  p_star_ = p;
  double dl, dr;
  u_star_ = 0.5 * (l_.u + r_.u) + 0.5 * (f(p, r_, cr_, dr) - f(p, l_, cl_, dl));
  rho_star_l_ = star_density(p, l_);
  rho_star_r_ = star_density(p, r_);
}

double ExactRiemann::f(double p, const Primitive1D& w, double c, double& df) const {
  if (p > w.p) {
    const double a = 2.0 / ((g_ + 1.0) * w.rho);
    const double b = (g_ - 1.0) / (g_ + 1.0) * w.p;
    const double q = std::sqrt(a / (p + b));
    df = q * (1.0 - 0.5 * (p - w.p) / (p + b));
    return (p - w.p) * q;
  }
  const double ratio = p / w.p;
  df = std::pow(ratio, -(g_ + 1.0) / (2.0 * g_)) / (w.rho * c);
  return 2.0 * c / (g_ - 1.0) * (std::pow(ratio, (g_ - 1.0) / (2.0 * g_)) - 1.0);
}

double ExactRiemann::star_density(double p, const Primitive1D& w) const {
  const double ratio = p / w.p;
  if (p > w.p) {
    const double gm = (g_ - 1.0) / (g_ + 1.0);
    return w.rho * (ratio + gm) / (gm * ratio + 1.0);
  }
  return w.rho * std::pow(ratio, 1.0 / g_);
}

double ExactRiemann::pressure_residual() const {
  double dl, dr;
  return std::abs(f(p_star_, l_, cl_, dl) + f(p_star_, r_, cr_, dr) + r_.u - l_.u);
}

Primitive1D ExactRiemann::sample(double s) const {
  const double gp = (g_ + 1.0) / (2.0 * g_);
  const double gm = (g_ - 1.0) / (2.0 * g_);
  if (s <= u_star_) {
    const Primitive1D& w = l_;
    const double c = cl_;
    if (p_star_ > w.p) {
      const double sl = w.u - c * std::sqrt(gp * p_star_ / w.p + gm);
      if (s <= sl) return w;
      return {rho_star_l_, u_star_, p_star_};
    }
    const double head = w.u - c;
    const double c_star = c * std::pow(p_star_ / w.p, gm);
    const double tail = u_star_ - c_star;
    if (s <= head) return w;
    if (s >= tail) return {rho_star_l_, u_star_, p_star_};
    const double k = 2.0 / (g_ + 1.0) + (g_ - 1.0) / ((g_ + 1.0) * c) * (w.u - s);
    return {w.rho * std::pow(k, 2.0 / (g_ - 1.0)), 2.0 / (g_ + 1.0) * (c + 0.5 * (g_ - 1.0) * w.u + s),
            w.p * std::pow(k, 2.0 * g_ / (g_ - 1.0))};
  }
  const Primitive1D& w = r_;
  const double c = cr_;
  if (p_star_ > w.p) {
    const double sr = w.u + c * std::sqrt(gp * p_star_ / w.p + gm);
    if (s >= sr) return w;
    return {rho_star_r_, u_star_, p_star_};
  }
  const double head = w.u + c;
  const double c_star = c * std::pow(p_star_ / w.p, gm);
  const double tail = u_star_ + c_star;
  if (s >= head) return w;
  if (s <= tail) return {rho_star_r_, u_star_, p_star_};
  const double k = 2.0 / (g_ + 1.0) - (g_ - 1.0) / ((g_ + 1.0) * c) * (w.u - s);
  return {w.rho * std::pow(k, 2.0 / (g_ - 1.0)), 2.0 / (g_ + 1.0) * (-c + 0.5 * (g_ - 1.0) * w.u + s),
          w.p * std::pow(k, 2.0 * g_ / (g_ - 1.0))};
}

Primitive1D ExactRiemann::sample(double x, double t, double x0) const {
  if (!(t > 0.0)) return x < x0 ? l_ : r_;
  return sample((x - x0) / t);
}

}  // namespace mmdg
