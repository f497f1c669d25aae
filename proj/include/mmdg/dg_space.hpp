#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "mmdg/basis.hpp"
#include "mmdg/geometry.hpp"
#include "mmdg/quadrature.hpp"

namespace mmdg {

/// Modal coefficients, layout [element][component][mode].
struct DGField {
  int degree = 0;
  int components = 1;
  int basis_size = 1;
  int num_elements = 0;
  std::vector<double> coeffs;

  DGField() = default;
  DGField(int num_elements, int components, int basis_size, int degree);

  double& operator()(int k, int c, int i) { return coeffs[(k * components + c) * basis_size + i]; }
  double operator()(int k, int c, int i) const { return coeffs[(k * components + c) * basis_size + i]; }
  std::span<double> element(int k) {
    return {coeffs.data() + k * components * basis_size, std::size_t(components * basis_size)};
  }
  std::span<const double> element(int k) const {
    return {coeffs.data() + k * components * basis_size, std::size_t(components * basis_size)};
  }
  double cell_average(int k, int c) const { return (*this)(k, c, 0); }
};

enum class TraceSide { interior = 0, exterior = 1 };

/// P^k DG space on a fixed-connectivity simplicial mesh. Reference-coordinate
/// tables are time independent because the basis moves with the mesh.
class DGSpace {
 public:
  DGSpace(const SimplicialMesh& mesh, int degree);

  const SimplicialMesh& mesh() const { return *mesh_; }
  const ReferenceBasis& basis() const { return basis_; }
  int degree() const { return basis_.degree(); }
  int basis_size() const { return basis_.size(); }
  const QuadratureRule& element_quadrature() const { return elem_rule_; }
  const QuadratureRule& face_quadrature() const { return face_rule_; }
  int face_points() const { return face_rule_.size(); }

  double elem_phi(int q, int i) const { return elem_phi_[q * basis_size() + i]; }
  const Vec2& elem_grad_ref(int q, int i) const { return elem_grad_[q * basis_size() + i]; }
  const Vec2& elem_point(int q) const { return elem_rule_.points[q]; }

  /// Reference coordinates of face Gauss point g as seen from one side.
  const Vec2& face_ref_point(int f, TraceSide side, int g) const {
    return face_ref_[(f * 2 + static_cast<int>(side)) * face_points() + g];
  }
  double face_phi(int f, TraceSide side, int g, int i) const {
    return face_phi_[((f * 2 + static_cast<int>(side)) * face_points() + g) * basis_size() + i];
  }
  /// Physical location of a face Gauss point, in owner-side coordinates.
  Vec2 face_point(int f, int g, std::span<const Vec2> x) const;
  /// Linear interpolation of nodal values (e.g. velocities) at a face Gauss point.
  Vec2 face_interpolate(int f, int g, std::span<const Vec2> nodal) const;
  /// Physical point of reference point xi in element k.
  Vec2 map_to_physical(int k, const Vec2& xi, std::span<const Vec2> x) const;
  /// Interpolates nodal values at reference point xi of element k.
  Vec2 element_interpolate(int k, const Vec2& xi, std::span<const Vec2> nodal) const;

  DGField make_field(int components) const;

 private:
  const SimplicialMesh* mesh_;
  ReferenceBasis basis_;
  QuadratureRule elem_rule_;
  QuadratureRule face_rule_;
  std::vector<double> elem_phi_;
  std::vector<Vec2> elem_grad_;
  std::vector<Vec2> face_ref_;
  std::vector<double> face_phi_;
};

using StateFunction = std::function<void(const Vec2& x, std::span<double> out)>;

/// L2 projection onto the DG space at the given positions.
DGField l2_project(const DGSpace& space, std::span<const Vec2> x, int components, const StateFunction& f);

/// Values of all components at reference point xi of element k.
void evaluate(const DGSpace& space, const DGField& u, int k, const Vec2& xi, std::span<double> out);
/// Values at a physical point inside element k.
void evaluate_physical(const DGSpace& space, const DGField& u, int k, const Vec2& p, std::span<const Vec2> x,
                       std::span<double> out);
/// Trace at face Gauss point g. The exterior side of a boundary face is a topology error.
void evaluate_trace(const DGSpace& space, const DGField& u, int f, TraceSide side, int g, std::span<double> out);

/// Element mass matrix at the given positions (|K| times identity for the
/// orthonormal basis), assembled by quadrature.
Eigen::MatrixXd mass_matrix(const DGSpace& space, std::span<const Vec2> x, int k);

/// Field snapshot: header `k m N`, then one line of n_b*m coefficients per element.
void write_field_snapshot(std::ostream& os, const DGField& u);
DGField read_field_snapshot(std::istream& is);

}  // namespace mmdg
