#pragma once

#include <array>
#include <span>
#include <vector>

#include "mmdg/geometry.hpp"

namespace mmdg {

/// Orthonormal modal basis of P^k on the reference simplex, with respect to
/// the reference measure normalized to total mass one. Function 0 is the
/// constant 1, so coefficient 0 is the cell average.
class ReferenceBasis {
 public:
  ReferenceBasis(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(coeffs_.rows()); }

  double value(int i, const Vec2& xi) const;
  Vec2 gradient(int i, const Vec2& xi) const;
  /// All basis values at xi; out.size() == size().
  void values(const Vec2& xi, std::span<double> out) const;
  void gradients(const Vec2& xi, std::span<Vec2> out) const;

  /// Monomial exponents (a, b) in the expansion order.
  const std::vector<std::array<int, 2>>& monomials() const { return monomials_; }
  /// Row i holds the monomial coefficients of basis function i.
  const Eigen::MatrixXd& monomial_coefficients() const { return coeffs_; }

 private:
  int dim_;
  int degree_;
  std::vector<std::array<int, 2>> monomials_;
  Eigen::MatrixXd coeffs_;
};

/// Exact normalized average of xi^a eta^b over the reference simplex.
double reference_monomial_average(int dim, int a, int b);

}  // namespace mmdg
