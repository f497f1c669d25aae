#pragma once

#include <span>

#include "mmdg/dg_space.hpp"
#include "mmdg/flux.hpp"

namespace mmdg {

/// TVB minmod slope limiter. Limited elements are reduced to their linear
/// part; cell averages are never touched.
struct LimiterSpec {
  bool enabled = true;
  double tvb_m = 0.0;
  bool characteristic = true;  // uses the model's eigenvectors when it has more than one component
  double nu = 1.5;             // neighbor-difference factor of the triangle limiter
};

double minmod(double a, double b, double c);
/// TVB-modified minmod: returns a unchanged when |a| <= m h^2.
double minmod_tvb(double a, double b, double c, double m, double h);

/// Limits `u` in place at positions x. Returns the number of limited elements.
int apply_limiter(const DGSpace& space, DGField& u, std::span<const Vec2> x, const LimiterSpec& spec,
                  const FluxModel* model = nullptr);

}  // namespace mmdg
