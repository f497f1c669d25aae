#include "mmdg/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace mmdg {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

double reference_monomial_average(int dim, int a, int b) {
  if (dim == 1) return b == 0 ? 1.0 / (a + 1) : 0.0;
  return 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2);
}

ReferenceBasis::ReferenceBasis(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("basis dimension must be 1 or 2");
  if (degree < 0 || degree > 3) throw std::invalid_argument("basis degree must be in [0, 3]");
  for (int total = 0; total <= degree; ++total) {
    if (dim == 1) {
      monomials_.push_back({total, 0});
    } else {
      for (int b = 0; b <= total; ++b) monomials_.push_back({total - b, b});
    }
  }
  const int n = static_cast<int>(monomials_.size());
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      gram(i, j) = reference_monomial_average(dim, monomials_[i][0] + monomials_[j][0],
                                              monomials_[i][1] + monomials_[j][1]);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw std::runtime_error("monomial Gram matrix not SPD");
  Eigen::MatrixXd lower = llt.matrixL();
  coeffs_ = lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
}

double ReferenceBasis::value(int i, const Vec2& xi) const {
  double v = 0.0;
  for (int m = 0; m <= i; ++m) {
    v += coeffs_(i, m) * ipow(xi.x(), monomials_[m][0]) * ipow(xi.y(), monomials_[m][1]);
  }
  return v;
}

Vec2 ReferenceBasis::gradient(int i, const Vec2& xi) const {
  Vec2 g = Vec2::Zero();
  for (int m = 0; m <= i; ++m) {
    const int a = monomials_[m][0];
    const int b = monomials_[m][1];
    if (a > 0) g.x() += coeffs_(i, m) * a * ipow(xi.x(), a - 1) * ipow(xi.y(), b);
    if (b > 0) g.y() += coeffs_(i, m) * b * ipow(xi.x(), a) * ipow(xi.y(), b - 1);
  }
  return g;
}

void ReferenceBasis::values(const Vec2& xi, std::span<double> out) const {
  for (int i = 0; i < size(); ++i) out[i] = value(i, xi);
}

void ReferenceBasis::gradients(const Vec2& xi, std::span<Vec2> out) const {
  for (int i = 0; i < size(); ++i) out[i] = gradient(i, xi);
}

}  // namespace mmdg
