#pragma once

#include <vector>

#include "mmdg/geometry.hpp"

namespace mmdg {

/// Quadrature on a reference domain with weights normalized to sum to one.
/// Element rules live on the reference simplex (unit interval in 1D, the
/// triangle (0,0),(1,0),(0,1) in 2D). Face rules are parametrized by s in
/// [0,1], stored in points[i].x(); the 1D face rule is a single point.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

/// n-point Gauss-Legendre rule mapped to [0,1].
QuadratureRule gauss_legendre_unit(int n);

/// Element rule exact for polynomials of total degree <= degree.
QuadratureRule element_rule(int dim, int degree);

/// Face rule exact for polynomials of degree <= degree along the face.
QuadratureRule face_rule(int dim, int degree);

}  // namespace mmdg
