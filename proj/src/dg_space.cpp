#include "mmdg/dg_space.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>

namespace mmdg {

namespace {

Vec2 reference_vertex(int i) {
  switch (i) {
    case 1:
      return Vec2(1.0, 0.0);
    case 2:
      return Vec2(0.0, 1.0);
    default:
      return Vec2(0.0, 0.0);
  }
}

int element_quadrature_degree(int k) { return std::max(2 * k, 3 * k); }
int face_quadrature_degree(int k) { return std::max(2 * k + 1, 3 * k); }

}  // namespace

DGField::DGField(int num_elements_, int components_, int basis_size_, int degree_)
    : degree(degree_),
      components(components_),
      basis_size(basis_size_),
      num_elements(num_elements_),
      coeffs(static_cast<std::size_t>(num_elements_) * components_ * basis_size_, 0.0) {}

DGSpace::DGSpace(const SimplicialMesh& mesh, int degree)
    : mesh_(&mesh),
      basis_(mesh.dim(), degree),
      elem_rule_(element_rule(mesh.dim(), element_quadrature_degree(degree))),
      face_rule_(face_rule(mesh.dim(), face_quadrature_degree(degree))) {
  const int nb = basis_.size();
  elem_phi_.resize(elem_rule_.size() * nb);
  elem_grad_.resize(elem_rule_.size() * nb);
  for (int q = 0; q < elem_rule_.size(); ++q) {
    basis_.values(elem_rule_.points[q], std::span<double>(elem_phi_.data() + q * nb, nb));
    basis_.gradients(elem_rule_.points[q], std::span<Vec2>(elem_grad_.data() + q * nb, nb));
  }

  const int ng = face_points();
  face_ref_.assign(mesh.num_faces() * 2 * ng, Vec2::Zero());
  face_phi_.assign(face_ref_.size() * nb, 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    for (int side = 0; side < 2; ++side) {
      const int k = side == 0 ? fc.owner : fc.neighbor;
      if (k < 0) continue;
      const auto& verts = side == 0 ? fc.v : fc.nv;
      const Vec2 a = reference_vertex(mesh.local_vertex(k, verts[0]));
      const Vec2 b = mesh.dim() == 2 ? reference_vertex(mesh.local_vertex(k, verts[1])) : a;
      for (int g = 0; g < ng; ++g) {
        const double s = face_rule_.points[g].x();
        const Vec2 xi = (1.0 - s) * a + s * b;
        const int idx = (f * 2 + side) * ng + g;
        face_ref_[idx] = xi;
        basis_.values(xi, std::span<double>(face_phi_.data() + idx * nb, nb));
      }
    }
  }
}

Vec2 DGSpace::face_point(int f, int g, std::span<const Vec2> x) const {
  const Face& fc = mesh_->face(f);
  if (mesh_->dim() == 1) return x[fc.v[0]];
  const double s = face_rule_.points[g].x();
  return (1.0 - s) * x[fc.v[0]] + s * x[fc.v[1]];
}

Vec2 DGSpace::face_interpolate(int f, int g, std::span<const Vec2> nodal) const { return face_point(f, g, nodal); }

Vec2 DGSpace::map_to_physical(int k, const Vec2& xi, std::span<const Vec2> x) const {
  return element_interpolate(k, xi, x);
}

Vec2 DGSpace::element_interpolate(int k, const Vec2& xi, std::span<const Vec2> nodal) const {
  const auto& el = mesh_->element(k);
  if (mesh_->dim() == 1) return (1.0 - xi.x()) * nodal[el[0]] + xi.x() * nodal[el[1]];
  return (1.0 - xi.x() - xi.y()) * nodal[el[0]] + xi.x() * nodal[el[1]] + xi.y() * nodal[el[2]];
}

DGField DGSpace::make_field(int components) const {
  return DGField(mesh_->num_elements(), components, basis_size(), degree());
}

DGField l2_project(const DGSpace& space, std::span<const Vec2> x, int components, const StateFunction& f) {
  const SimplicialMesh& mesh = space.mesh();
  const ReferenceBasis& basis = space.basis();
  const QuadratureRule rule = element_rule(mesh.dim(), 2 * space.degree() + 6);
  const int nb = basis.size();
  std::vector<double> phi(rule.size() * nb);
  for (int q = 0; q < rule.size(); ++q) basis.values(rule.points[q], std::span<double>(phi.data() + q * nb, nb));
  DGField u = space.make_field(components);
  std::vector<double> val(components);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    element_measure(mesh, x, k);  // geometry check
    for (int q = 0; q < rule.size(); ++q) {
      f(space.map_to_physical(k, rule.points[q], x), val);
      for (int c = 0; c < components; ++c) {
        for (int i = 0; i < nb; ++i) u(k, c, i) += rule.weights[q] * val[c] * phi[q * nb + i];
      }
    }
  }
  return u;
}

void evaluate(const DGSpace& space, const DGField& u, int k, const Vec2& xi, std::span<double> out) {
  const int nb = space.basis_size();
  std::vector<double> phi(nb);
  space.basis().values(xi, phi);
  for (int c = 0; c < u.components; ++c) {
    double s = 0.0;
    for (int i = 0; i < nb; ++i) s += u(k, c, i) * phi[i];
    out[c] = s;
  }
}

void evaluate_physical(const DGSpace& space, const DGField& u, int k, const Vec2& p, std::span<const Vec2> x,
                       std::span<double> out) {
  const AffineMap map = affine_map(space.mesh(), x, k);
  Vec2 xi = map.inverse * (p - map.origin);
  if (space.mesh().dim() == 1) xi.y() = 0.0;
  evaluate(space, u, k, xi, out);
}

void evaluate_trace(const DGSpace& space, const DGField& u, int f, TraceSide side, int g, std::span<double> out) {
  const Face& fc = space.mesh().face(f);
  const int k = side == TraceSide::interior ? fc.owner : fc.neighbor;
  if (k < 0) throw TopologyError("boundary face has no exterior element");
  const int nb = space.basis_size();
  for (int c = 0; c < u.components; ++c) {
    double s = 0.0;
    for (int i = 0; i < nb; ++i) s += u(k, c, i) * space.face_phi(f, side, g, i);
    out[c] = s;
  }
}

Eigen::MatrixXd mass_matrix(const DGSpace& space, std::span<const Vec2> x, int k) {
  const double measure = element_measure(space.mesh(), x, k);
  const int nb = space.basis_size();
  const QuadratureRule rule = element_rule(space.mesh().dim(), 2 * space.degree());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nb, nb);
  std::vector<double> phi(nb);
  for (int q = 0; q < rule.size(); ++q) {
    space.basis().values(rule.points[q], phi);
    for (int i = 0; i < nb; ++i) {
      for (int j = 0; j < nb; ++j) m(i, j) += measure * rule.weights[q] * phi[i] * phi[j];
    }
  }
  return m;
}

void write_field_snapshot(std::ostream& os, const DGField& u) {
  os << u.degree << ' ' << u.components << ' ' << u.num_elements << '\n' << std::setprecision(17);
  for (int k = 0; k < u.num_elements; ++k) {
    const auto block = u.element(k);
    for (std::size_t i = 0; i < block.size(); ++i) os << (i ? " " : "") << block[i];
    os << '\n';
  }
}

DGField read_field_snapshot(std::istream& is) {
  int k = 0, m = 0, n = 0;
  if (!(is >> k >> m >> n) || k < 0 || k > 3 || m < 1 || n < 0) throw std::runtime_error("malformed field header");
  // Basis size depends on dimension; infer it from the first line length.
  std::string line;
  std::getline(is, line);
  std::vector<double> all;
  double v;
  while (is >> v) all.push_back(v);
  if (n == 0 || all.size() % (static_cast<std::size_t>(n) * m) != 0) throw std::runtime_error("malformed field body");
  const int nb = static_cast<int>(all.size() / (static_cast<std::size_t>(n) * m));
  DGField u(n, m, nb, k);
  u.coeffs = std::move(all);
  return u;
}

}  // namespace mmdg
