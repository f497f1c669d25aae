#pragma once

#include <functional>

namespace mmdg {

/// Characteristic solution u(x, t) = u0(xi), x = xi + t u0(xi), of the 1D
/// Burgers equation. Valid only before characteristics cross.
class BurgersCharacteristics {
 public:
  using Fn = std::function<double(double)>;
  /// u0 must take values in [umin, umax]; breaking_time = -1 / min u0'.
  BurgersCharacteristics(Fn u0, Fn du0, double umin, double umax, double breaking_time);

  /// The default problem u0 = 1/2 + sin(pi x).
  static BurgersCharacteristics sine();

  double breaking_time() const { return t_break_; }
  /// Foot of the characteristic through (x, t).
  double foot(double x, double t) const;
  double value(double x, double t) const;

 private:
  Fn u0_, du0_;
  double umin_, umax_, t_break_;
};

}  // namespace mmdg
