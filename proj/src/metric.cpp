#include "mmdg/metric.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "mmdg/quadrature.hpp"

namespace mmdg {

namespace {

int unknowns(int dim) { return dim == 1 ? 3 : 6; }

void monomials(int dim, const Vec2& p, double* out) {
  out[0] = 1.0;
  out[1] = p.x();
  if (dim == 1) {
    out[2] = p.x() * p.x();
    return;
  }
  out[2] = p.y();
  out[3] = p.x() * p.x();
  out[4] = p.x() * p.y();
  out[5] = p.y() * p.y();
}

std::array<double, 2> eigenvalues(const Mat2& a, int dim) {
  if (dim == 1) return {a(0, 0), 0.0};
  Eigen::SelfAdjointEigenSolver<Mat2> es(a, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

}  // namespace

HessianRecovery::HessianRecovery(const SimplicialMesh& mesh) : mesh_(&mesh) {
  patches_.resize(mesh.num_elements());
  const int layers = mesh.dim() == 1 ? 1 : 2;
  for (int k = 0; k < mesh.num_elements(); ++k) patches_[k] = patch(k, layers);
}

std::vector<HessianRecovery::PatchEntry> HessianRecovery::patch(int k, int layers) const {
  std::vector<PatchEntry> out{{k, Vec2::Zero()}};
  std::vector<int> depth(mesh_->num_elements(), -1);
  depth[k] = 0;
  std::size_t head = 0;
  while (head < out.size()) {
    const PatchEntry cur = out[head++];
    if (depth[cur.element] >= layers) continue;
    for (int j = 0; j < mesh_->faces_per_element(); ++j) {
      const Face& fc = mesh_->face(mesh_->element_face(cur.element, j));
      if (fc.boundary()) continue;
      int other;
      Vec2 step;
      if (fc.owner == cur.element && fc.owner_local == j) {
        other = fc.neighbor;
        step = fc.shift;
      } else {
        other = fc.owner;
        step = -fc.shift;
      }
      if (depth[other] >= 0) continue;
      depth[other] = depth[cur.element] + 1;
      out.push_back({other, cur.shift + step});
    }
  }
  return out;
}

bool HessianRecovery::fit(int k, const std::vector<PatchEntry>& entries, std::span<const double> values,
                          std::span<const Vec2> x, Mat2& h) const {
  const int d = mesh_->dim();
  const int n = unknowns(d);
  if (static_cast<int>(entries.size()) < n) return false;
  static const QuadratureRule rule1 = element_rule(1, 2);
  static const QuadratureRule rule2 = element_rule(2, 2);
  const QuadratureRule& rule = d == 1 ? rule1 : rule2;
  const Vec2 center = element_centroid(*mesh_, x, k);
  double scale = 0.0;
  for (const auto& e : entries) {
    scale = std::max(scale, (element_centroid(*mesh_, x, e.element) + e.shift - center).norm());
  }
  if (scale <= 0.0) return false;
  Eigen::MatrixXd a(entries.size(), n);
  Eigen::VectorXd b(entries.size());
  double mono[6];
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const auto& el = mesh_->element(entries[r].element);
    a.row(r).setZero();
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2& xi = rule.points[q];
      Vec2 p;
      if (d == 1) {
        p = (1.0 - xi.x()) * x[el[0]] + xi.x() * x[el[1]];
      } else {
        p = (1.0 - xi.x() - xi.y()) * x[el[0]] + xi.x() * x[el[1]] + xi.y() * x[el[2]];
      }
      p = (p + entries[r].shift - center) / scale;
      monomials(d, p, mono);
      for (int c = 0; c < n; ++c) a(r, c) += rule.weights[q] * mono[c];
    }
    b[r] = values[entries[r].element];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < n) return false;
  const Eigen::VectorXd coef = qr.solve(b);
  const double s2 = 1.0 / (scale * scale);
  h.setZero();
  if (d == 1) {
    h(0, 0) = 2.0 * coef[2] * s2;
  } else {
    h(0, 0) = 2.0 * coef[3] * s2;
    h(0, 1) = h(1, 0) = coef[4] * s2;
    h(1, 1) = 2.0 * coef[5] * s2;
  }
  return true;
}

RecoveredHessian HessianRecovery::recover(std::span<const double> cell_averages, std::span<const Vec2> x) const {
  if (static_cast<int>(cell_averages.size()) != mesh_->num_elements()) {
    throw std::invalid_argument("cell value count mismatch");
  }
  RecoveredHessian r;
  r.dim = mesh_->dim();
  r.h.resize(mesh_->num_elements());
  r.abs_h.resize(mesh_->num_elements());
  const int base_layers = mesh_->dim() == 1 ? 1 : 2;
  for (int k = 0; k < mesh_->num_elements(); ++k) {
    Mat2 h;
    bool ok = fit(k, patches_[k], cell_averages, x, h);
    for (int extra = 1; !ok && extra <= 2; ++extra) ok = fit(k, patch(k, base_layers + extra), cell_averages, x, h);
    if (!ok) throw std::runtime_error("Hessian recovery: rank-deficient patch at element " + std::to_string(k));
    r.h[k] = h;
    r.abs_h[k] = abs_symmetric(h, r.dim);
  }
  return r;
}

RecoveredHessian HessianRecovery::recover(const DGField& u, int component, std::span<const Vec2> x) const {
  std::vector<double> avg(u.num_elements);
  for (int k = 0; k < u.num_elements; ++k) avg[k] = u.cell_average(k, component);
  return recover(avg, x);
}

Mat2 abs_symmetric(const Mat2& a, int dim) {
  if (dim == 1) {
    Mat2 r = Mat2::Zero();
    r(0, 0) = std::abs(a(0, 0));
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Mat2> es(a);
  const Mat2& q = es.eigenvectors();
  return q * es.eigenvalues().cwiseAbs().asDiagonal() * q.transpose();
}

BetaResult solve_beta(const SimplicialMesh& mesh, std::span<const Vec2> x, std::span<const Mat2> abs_h,
                      RootMethod method, double beta_floor) {
  const int d = mesh.dim();
  const double e = 2.0 / (d + 4.0);
  if (static_cast<int>(abs_h.size()) != mesh.num_elements()) throw std::invalid_argument("Hessian count mismatch");
  std::vector<double> measure(mesh.num_elements());
  std::vector<std::array<double, 2>> lam(mesh.num_elements());
  double total = 0.0, rhs = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    measure[k] = element_measure(mesh, x, k);
    lam[k] = eigenvalues(abs_h[k], d);
    lam[k][0] = std::max(lam[k][0], 0.0);
    lam[k][1] = std::max(lam[k][1], 0.0);
    const double det = d == 1 ? lam[k][0] : lam[k][0] * lam[k][1];
    total += measure[k];
    rhs += measure[k] * std::pow(det, e);
  }
  rhs *= 2.0;
  BetaResult res;
  if (!(rhs > 0.0)) {
    res.beta = beta_floor;
    res.degenerate = true;
    return res;
  }
  auto residual = [&](double beta, double* deriv) {
    double f = 0.0, df = 0.0;
    for (int k = 0; k < mesh.num_elements(); ++k) {
      const double a0 = beta + lam[k][0];
      const double det = d == 1 ? a0 : a0 * (beta + lam[k][1]);
      const double ddet = d == 1 ? 1.0 : a0 + beta + lam[k][1];
      const double pw = std::pow(det, e);
      f += measure[k] * pw;
      df += measure[k] * e * pw / det * ddet;
    }
    if (deriv) *deriv = df;
    return f - rhs;
  };
  // det(beta I + A) >= beta^d gives an upper bracket.
  double hi = std::pow(rhs / total, 1.0 / (d * e));
  while (residual(hi, nullptr) < 0.0) hi *= 2.0;
  double beta;
  if (method == RootMethod::bisection) {
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (residual(mid, nullptr) < 0.0 ? lo : hi) = mid;
    }
    beta = 0.5 * (lo + hi);
  } else {
    beta = hi;
    for (int it = 0; it < 100; ++it) {
      double df;
      const double f = residual(beta, &df);
      double next = beta - f / df;
      if (next <= 0.0) next = 0.5 * beta;
      const bool done = std::abs(next - beta) <= 1e-15 * beta;
      beta = next;
      if (done) break;
    }
  }
  res.beta = std::max(beta, beta_floor);
  res.residual = std::abs(residual(res.beta, nullptr)) / rhs;
  return res;
}

MetricField metric_from_hessian(std::span<const Mat2> abs_h, double beta, int dim) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  MetricField out;
  out.dim = dim;
  out.m.resize(abs_h.size());
  for (std::size_t k = 0; k < abs_h.size(); ++k) {
    Mat2 a = abs_h[k];
    a(0, 0) += beta;
    if (dim == 2) {
      a(1, 1) += beta;
    } else {
      a(0, 1) = a(1, 0) = a(1, 1) = 0.0;
    }
    out.m[k] = std::pow(metric_det(a, dim), -1.0 / (dim + 4.0)) * a;
  }
  return out;
}

MetricField normalize_metric(const MetricField& m) {
  double mx = 0.0;
  for (const auto& a : m.m) mx = std::max(mx, a.cwiseAbs().maxCoeff());
  if (!(mx > 0.0)) throw std::invalid_argument("zero metric cannot be normalized");
  MetricField out = m;
  for (auto& a : out.m) a /= mx;
  return out;
}

Mat2 intersect(const Mat2& a, const Mat2& b, int dim) {
  if (dim == 1) {
    Mat2 r = Mat2::Zero();
    r(0, 0) = std::max(a(0, 0), b(0, 0));
    return r;
  }
  const Eigen::LLT<Mat2> llt(a);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("intersection needs SPD input");
  const Mat2 l = llt.matrixL();
  const Mat2 linv = l.inverse();
  const Mat2 c = linv * b * linv.transpose();
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (c + c.transpose()));
  const Mat2& q = es.eigenvectors();
  const Eigen::Vector2d lam = es.eigenvalues().cwiseMax(1.0);
  Mat2 r = l * q * lam.asDiagonal() * q.transpose() * l.transpose();
  return 0.5 * (r + r.transpose());
}

MetricField metric_intersection(const MetricField& m1, const MetricField& m2) {
  if (m1.m.size() != m2.m.size() || m1.dim != m2.dim) throw std::invalid_argument("metric fields differ in size");
  const MetricField a = normalize_metric(m1);
  const MetricField b = normalize_metric(m2);
  MetricField out;
  out.dim = m1.dim;
  out.m.resize(a.m.size());
  for (std::size_t k = 0; k < a.m.size(); ++k) out.m[k] = intersect(a.m[k], b.m[k], out.dim);
  return out;
}

MetricField smooth_metric(const MetricField& m, const SimplicialMesh& mesh, std::span<const Vec2> x, int passes) {
  std::vector<double> measure(mesh.num_elements());
  for (int k = 0; k < mesh.num_elements(); ++k) measure[k] = element_measure(mesh, x, k);
  MetricField cur = m;
  for (int p = 0; p < passes; ++p) {
    MetricField next = cur;
    for (int k = 0; k < mesh.num_elements(); ++k) {
      Mat2 acc = measure[k] * cur.m[k];
      double w = measure[k];
      for (int j = 0; j < mesh.faces_per_element(); ++j) {
        const Face& fc = mesh.face(mesh.element_face(k, j));
        if (fc.boundary()) continue;
        const int other = fc.owner == k && fc.owner_local == j ? fc.neighbor : fc.owner;
        acc += measure[other] * cur.m[other];
        w += measure[other];
      }
      next.m[k] = acc / w;
    }
    cur = std::move(next);
  }
  return cur;
}

bool is_spd(const Mat2& m, int dim) {
  if (dim == 1) return m(0, 0) > 0.0;
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-13 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  const auto lam = eigenvalues(m, 2);
  return lam[0] > 0.0 && lam[1] > 0.0;
}

double metric_det(const Mat2& m, int dim) { return dim == 1 ? m(0, 0) : m.determinant(); }

void write_metric(std::ostream& os, const MetricField& m) {
  os << std::setprecision(17);
  for (const auto& a : m.m) {
    if (m.dim == 1) {
      os << a(0, 0) << '\n';
    } else {
      os << a(0, 0) << ' ' << a(0, 1) << ' ' << a(1, 0) << ' ' << a(1, 1) << '\n';
    }
  }
}

}  // namespace mmdg
