#include "mmdg/mmpde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Sparse>

namespace mmdg {

namespace {

using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

Small edge_matrix(const SimplicialMesh& mesh, std::span<const Vec2> x, int k) {
  const int d = mesh.dim();
  const auto& el = mesh.element(k);
  Small e(d, d);
  for (int j = 0; j < d; ++j) {
    const Vec2 v = x[el[j + 1]] - x[el[0]];
    for (int i = 0; i < d; ++i) e(i, j) = v[i];
  }
  return e;
}

Small block(const Mat2& m, int d) { return m.topLeftCorner(d, d); }

double min_height(const SimplicialMesh& mesh, std::span<const Vec2> x, int k) {
  double h = std::numeric_limits<double>::infinity();
  for (int j = 0; j < mesh.faces_per_element(); ++j) h = std::min(h, edge_height(mesh, x, k, j));
  return h;
}

// Uniform bucket grid over element bounding boxes.
class PointLocator {
 public:
  PointLocator(const SimplicialMesh& mesh, std::span<const Vec2> x) : mesh_(&mesh), x_(x) {
    lo_ = hi_ = x[0];
    for (const Vec2& p : x) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    const int ne = mesh.num_elements();
    nb_[0] = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(ne))));
    nb_[1] = mesh.dim() == 1 ? 1 : nb_[0];
    if (mesh.dim() == 1) nb_[0] = std::max(1, ne);
    buckets_.assign(nb_[0] * nb_[1], {});
    for (int k = 0; k < ne; ++k) {
      Vec2 a = x[mesh.element(k)[0]], b = a;
      for (int j = 1; j <= mesh.dim(); ++j) {
        a = a.cwiseMin(x[mesh.element(k)[j]]);
        b = b.cwiseMax(x[mesh.element(k)[j]]);
      }
      const auto [i0, j0] = cell(a);
      const auto [i1, j1] = cell(b);
      for (int i = i0; i <= i1; ++i) {
        for (int j = j0; j <= j1; ++j) buckets_[j * nb_[0] + i].push_back(k);
      }
    }
  }

  // element and clamped barycentric coordinates
  std::pair<int, std::array<double, 3>> locate(const Vec2& p) const {
    const auto [i, j] = cell(p);
    int best = -1;
    double best_min = -std::numeric_limits<double>::infinity();
    std::array<double, 3> best_l{};
    for (int k : buckets_[j * nb_[0] + i]) {
      const auto l = barycentric(*mesh_, x_, k, p);
      double mn = l[0];
      for (int v = 1; v <= mesh_->dim(); ++v) mn = std::min(mn, l[v]);
      if (mn > best_min) {
        best_min = mn;
        best = k;
        best_l = l;
      }
    }
    if (best < 0 || best_min < -1e-9) throw MeshAdaptError("point outside the computational mesh");
    double s = 0.0;
    for (int v = 0; v <= mesh_->dim(); ++v) s += (best_l[v] = std::max(best_l[v], 0.0));
    for (int v = 0; v <= mesh_->dim(); ++v) best_l[v] /= s;
    return {best, best_l};
  }

 private:
  std::pair<int, int> cell(const Vec2& p) const {
    int c[2] = {0, 0};
    for (int a = 0; a < 2; ++a) {
      const double w = hi_[a] - lo_[a];
      if (w > 0.0) c[a] = std::clamp(static_cast<int>((p[a] - lo_[a]) / w * nb_[a]), 0, nb_[a] - 1);
    }
    return {c[0], c[1]};
  }

  const SimplicialMesh* mesh_;
  std::span<const Vec2> x_;
  Vec2 lo_, hi_;
  int nb_[2];
  std::vector<std::vector<int>> buckets_;
};

}  // namespace

MeshEnergy::MeshEnergy(const SimplicialMesh& mesh, std::span<const Vec2> x, double theta, double p)
    : mesh_(&mesh), theta_(theta), p_(p) {
  if (static_cast<int>(x.size()) != mesh.num_vertices()) throw std::invalid_argument("physical mesh size");
  const int d = mesh.dim();
  inv_edges_.resize(mesh.num_elements());
  measure_.resize(mesh.num_elements());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Small e = edge_matrix(mesh, x, k);
    const double det = e.determinant();
    if (!(det > 0.0)) throw GeometryError("meshing energy needs a valid physical mesh");
    inv_edges_[k] = Mat2::Identity();
    inv_edges_[k].topLeftCorner(d, d) = e.inverse();
    measure_[k] = d == 1 ? det : 0.5 * det;
  }
}

double MeshEnergy::element_energy(std::span<const Vec2> xi, const Mat2& metric, int k, Mat2* grad_edges) const {
  const int d = mesh_->dim();
  const Small ec = edge_matrix(*mesh_, xi, k);
  if (!(ec.determinant() > 0.0)) return std::numeric_limits<double>::infinity();
  const Small e_inv = block(inv_edges_[k], d);
  const Small j = ec * e_inv;
  const Small m = block(metric, d);
  const Small m_inv = m.inverse();
  const double sq = std::sqrt(m.determinant());
  const double tr = (j * m_inv * j.transpose()).trace();
  const double r = j.determinant();
  const double q = d * p_ / 2.0;
  const double dq = std::pow(static_cast<double>(d), q);
  const double g = theta_ * sq * std::pow(tr, q) + (1.0 - 2.0 * theta_) * dq * sq * std::pow(r / sq, p_);
  if (grad_edges) {
    const Small a = d * p_ * theta_ * sq * std::pow(tr, q - 1.0) * j * m_inv;
    const double g_r = p_ * (1.0 - 2.0 * theta_) * dq * std::pow(sq, 1.0 - p_) * std::pow(r, p_ - 1.0);
    const Small dj = a + g_r * r * j.inverse().transpose();
    const Small ge = measure_[k] * dj * e_inv.transpose();
    grad_edges->setZero();
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) (*grad_edges)(a, b) = ge(a, b);
    }
  }
  return measure_[k] * g;
}

double MeshEnergy::energy(std::span<const Vec2> xi, const MetricField& m) const {
  double s = 0.0;
  for (int k = 0; k < mesh_->num_elements(); ++k) s += element_energy(xi, m.m[k], k, nullptr);
  return s;
}

void MeshEnergy::gradient(std::span<const Vec2> xi, const MetricField& m, std::vector<Vec2>& grad,
                          std::vector<double>& weight) const {
  const int d = std::min(mesh_->dim(), 2);
  grad.assign(mesh_->num_vertices(), Vec2::Zero());
  weight.assign(mesh_->num_elements(), 0.0);
  Mat2 ge;
  for (int k = 0; k < mesh_->num_elements(); ++k) {
    const double ek = element_energy(xi, m.m[k], k, &ge);
    if (!std::isfinite(ek)) throw GeometryError("mesh energy undefined on an inverted element");
    const auto& el = mesh_->element(k);
    Vec2 sum = Vec2::Zero();
    for (int jv = 1; jv <= d; ++jv) {
      Vec2 col = Vec2::Zero();
      for (int i = 0; i < d; ++i) col[i] = ge(i, jv - 1);
      grad[el[jv]] += col;
      sum += col;
    }
    grad[el[0]] -= sum;
    const double h = min_height(*mesh_, xi, k);
    weight[k] = ek / (h * h);
  }
}

std::vector<Vec2> interpolate_map(const SimplicialMesh& mesh, std::span<const Vec2> from, std::span<const Vec2> to,
                                  std::span<const Vec2> points) {
  const PointLocator loc(mesh, from);
  std::vector<Vec2> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [k, l] = loc.locate(points[i]);
    Vec2 v = Vec2::Zero();
    for (int j = 0; j <= mesh.dim(); ++j) v += l[j] * to[mesh.element(k)[j]];
    out[i] = v;
  }
  return out;
}

std::vector<Vec2> adapt_mesh(const SimplicialMesh& mesh, std::span<const Vec2> xi_c, std::span<const Vec2> x,
                             const MetricField& m, const MmpdeParams& params, double dt) {
  if (!(params.tau > 0.0) || params.n_sweeps < 1) throw std::invalid_argument("invalid mesh mover parameters");
  if (!(dt > 0.0)) throw std::invalid_argument("mesh mover time span must be positive");
  if (static_cast<int>(m.m.size()) != mesh.num_elements()) throw std::invalid_argument("metric/mesh mismatch");
  if (xi_c.size() != x.size()) throw std::invalid_argument("computational/physical mesh size mismatch");
  for (const auto& a : m.m) {
    if (!is_spd(a, mesh.dim())) throw std::invalid_argument("metric is not SPD");
  }
  if (!validate_mesh(mesh, x).ok()) throw GeometryError("adapt_mesh needs a valid mesh");
  const int d = mesh.dim();
  const int nv = mesh.num_vertices();
  const MeshEnergy energy(mesh, x, params.theta, params.p);

  // periodic copies move together; a group is fixed in a direction if any member is
  std::vector<int> group_of(nv), leader;
  std::map<int, int> key_to_group;
  for (int v = 0; v < nv; ++v) {
    const int g = mesh.constraint(v).group;
    const int key = g < 0 ? -1 - v : g;
    auto [it, inserted] = key_to_group.try_emplace(key, static_cast<int>(key_to_group.size()));
    if (inserted) leader.push_back(v);
    group_of[v] = it->second;
  }
  const int ng = static_cast<int>(key_to_group.size());
  std::array<std::vector<int>, 2> unknown;
  std::array<int, 2> n_unknown{0, 0};
  for (int c = 0; c < d; ++c) {
    std::vector<char> fixed(ng, 0);
    for (int v = 0; v < nv; ++v) {
      const auto& con = mesh.constraint(v);
      if (c == 0 ? con.fix_x : con.fix_y) fixed[group_of[v]] = 1;
    }
    unknown[c].assign(ng, -1);
    for (int g = 0; g < ng; ++g) {
      if (!fixed[g]) unknown[c][g] = n_unknown[c]++;
    }
  }

  std::vector<Vec2> xi(xi_c.begin(), xi_c.end());
  std::vector<Vec2> trial(xi.size());
  std::vector<Vec2> grad;
  std::vector<double> weight;
  std::vector<Vec2> delta(ng);
  std::vector<double> group_h(ng);
  std::vector<Vec2> x_new;
  std::array<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>, 2> ldlt;
  std::array<bool, 2> analyzed{false, false};
  double step_size = std::min(1.0, dt / (params.tau * params.n_sweeps));
  int retries = 0;
  auto retry = [&](const char* what) {
    if (++retries > params.max_retries) {
      throw MeshAdaptError(std::string("mesh mover gave up after ") + std::to_string(params.max_retries) +
                           " retries: " + what);
    }
    step_size *= 0.5;
  };

  while (true) {
    for (int sweep = 0; sweep < params.n_sweeps; ++sweep) {
      energy.gradient(xi, m, grad, weight);
      std::fill(group_h.begin(), group_h.end(), std::numeric_limits<double>::infinity());
      for (int k = 0; k < mesh.num_elements(); ++k) {
        const double h = min_height(mesh, xi, k);
        for (int jv = 0; jv <= d; ++jv) {
          double& gh = group_h[group_of[mesh.element(k)[jv]]];
          gh = std::min(gh, h);
        }
      }
      std::fill(delta.begin(), delta.end(), Vec2::Zero());
      for (int c = 0; c < d; ++c) {
        if (n_unknown[c] == 0) continue;
        const auto& idx = unknown[c];
        std::vector<Eigen::Triplet<double>> trip;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknown[c]);
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(n_unknown[c]);
        for (int v = 0; v < nv; ++v) {
          const int i = idx[group_of[v]];
          if (i >= 0) rhs[i] -= grad[v][c];
        }
        for (int k = 0; k < mesh.num_elements(); ++k) {
          const auto& el = mesh.element(k);
          for (int a = 0; a <= d; ++a) {
            for (int b = a + 1; b <= d; ++b) {
              const int ga = group_of[el[a]], gb = group_of[el[b]];
              if (ga == gb) continue;
              const int ia = idx[ga], ib = idx[gb];
              if (ia >= 0) diag[ia] += weight[k];
              if (ib >= 0) diag[ib] += weight[k];
              if (ia >= 0 && ib >= 0) {
                trip.emplace_back(ia, ib, -weight[k]);
                trip.emplace_back(ib, ia, -weight[k]);
              }
            }
          }
        }
        // tiny shift keeps the system definite when a component has no anchor
        const double shift = 1e-10 * diag.maxCoeff();
        for (int i = 0; i < n_unknown[c]; ++i) trip.emplace_back(i, i, diag[i] + shift);
        Eigen::SparseMatrix<double> lap(n_unknown[c], n_unknown[c]);
        lap.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed[c]) {
          ldlt[c].analyzePattern(lap);
          analyzed[c] = true;
        }
        ldlt[c].factorize(lap);
        if (ldlt[c].info() != Eigen::Success) throw MeshAdaptError("mesh mover preconditioner is singular");
        const Eigen::VectorXd sol = ldlt[c].solve(rhs);
        for (int g = 0; g < ng; ++g) {
          if (idx[g] >= 0) delta[g][c] = sol[idx[g]];
        }
      }
      while (true) {
        trial = xi;
        for (int v = 0; v < nv; ++v) {
          const int g = group_of[v];
          Vec2 step = step_size * delta[g];
          const double cap = params.max_move * group_h[g];
          if (step.norm() > cap) step *= cap / step.norm();
          trial[v] += step;
        }
        if (validate_mesh(mesh, trial).ok()) break;
        retry("computational mesh inverted");
      }
      xi.swap(trial);
    }

    // x as a function of xi, evaluated at the fixed computational vertices
    x_new = interpolate_map(mesh, xi, x, xi_c);
    for (int v = 0; v < nv; ++v) {
      const int l = leader[group_of[v]];
      Vec2 p = x[v] + (x_new[l] - x[l]);
      if (mesh.constraint(v).fix_x) p.x() = x[v].x();
      if (d == 1 || mesh.constraint(v).fix_y) p.y() = x[v].y();
      x_new[v] = p;
    }
    if (validate_mesh(mesh, x_new).ok()) return x_new;
    retry("interpolated mesh inverted");
    xi.assign(xi_c.begin(), xi_c.end());
  }
}

std::vector<Vec2> nodal_velocity(std::span<const Vec2> x_old, std::span<const Vec2> x_new, double dt_tilde) {
  if (!(dt_tilde > 0.0)) throw std::invalid_argument("dt_tilde must be positive");
  if (x_old.size() != x_new.size()) throw std::invalid_argument("position arrays differ in size");
  std::vector<Vec2> v(x_old.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (x_new[i] - x_old[i]) / dt_tilde;
  return v;
}

}  // namespace mmdg
