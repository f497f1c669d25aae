#include "mmdg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mmdg {

namespace {

constexpr int kMaxDegree = 40;

}  // namespace

QuadratureRule gauss_legendre_unit(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("unsupported Gauss-Legendre order");
  QuadratureRule rule;
  rule.points.resize(n, Vec2::Zero());
  rule.weights.resize(n);
  rule.exactness = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.points[n - 1 - i] = Vec2(0.5 * (z + 1.0), 0.0);
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

QuadratureRule element_rule(int dim, int degree) {
  if (degree < 0 || degree > kMaxDegree) throw std::invalid_argument("unsupported quadrature degree");
  if (dim == 1) return gauss_legendre_unit(degree / 2 + 1);
  if (dim != 2) throw std::invalid_argument("unsupported dimension");
  // Collapsed (Duffy) tensor rule: x = u, y = (1-u) v, dA = (1-u) du dv.
  // The u-integrand gains one degree from the Jacobian factor.
  const QuadratureRule gu = gauss_legendre_unit((degree + 1) / 2 + 1);
  const QuadratureRule gv = gauss_legendre_unit(degree / 2 + 1);
  QuadratureRule rule;
  rule.exactness = degree;
  for (int a = 0; a < gu.size(); ++a) {
    const double u = gu.points[a].x();
    for (int b = 0; b < gv.size(); ++b) {
      const double v = gv.points[b].x();
      rule.points.emplace_back(u, (1.0 - u) * v);
      // Reference triangle area is 1/2; normalize to unit total weight.
      rule.weights.push_back(2.0 * gu.weights[a] * gv.weights[b] * (1.0 - u));
    }
  }
  return rule;
}

QuadratureRule face_rule(int dim, int degree) {
  if (degree < 0 || degree > kMaxDegree) throw std::invalid_argument("unsupported quadrature degree");
  if (dim == 1) {
    QuadratureRule rule;
    rule.points = {Vec2(0.0, 0.0)};
    rule.weights = {1.0};
    rule.exactness = kMaxDegree;
    return rule;
  }
  if (dim != 2) throw std::invalid_argument("unsupported dimension");
  return gauss_legendre_unit(degree / 2 + 1);
}

}  // namespace mmdg
