#include "mmdg/burgers_exact.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mmdg {

BurgersCharacteristics::BurgersCharacteristics(Fn u0, Fn du0, double umin, double umax, double breaking_time)
    : u0_(std::move(u0)), du0_(std::move(du0)), umin_(umin), umax_(umax), t_break_(breaking_time) {}

BurgersCharacteristics BurgersCharacteristics::sine() {
  const double pi = std::numbers::pi;
  return BurgersCharacteristics([pi](double x) { return 0.5 + std::sin(pi * x); },
                                [pi](double x) { return pi * std::cos(pi * x); }, -0.5, 1.5, 1.0 / pi);
}

double BurgersCharacteristics::foot(double x, double t) const {
  if (t < 0.0) throw std::invalid_argument("negative time");
  if (t >= t_break_) throw std::out_of_range("characteristics have crossed; no classical solution");
  // g(xi) = xi + t u0(xi) - x is increasing; the root lies in [x - t umax, x - t umin].
  double lo = x - t * umax_, hi = x - t * umin_;
  double xi = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = xi + t * u0_(xi) - x;
    if (g > 0.0) {
      hi = xi;
    } else {
      lo = xi;
    }
    const double dg = 1.0 + t * du0_(xi);
    double next = xi - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - xi) <= 1e-15 * (1.0 + std::abs(xi)) || hi - lo <= 1e-15 * (1.0 + std::abs(xi))) {
      return next;
    }
    xi = next;
  }
  return xi;
}

double BurgersCharacteristics::value(double x, double t) const { return u0_(foot(x, t)); }

}  // namespace mmdg
