#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mmdg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box. In 1D only the x-extent is used.
struct Box {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{1.0, 1.0};
};

enum class MeshPattern { interval, four_triangles_per_cell };

/// A mesh face ("edge" in 2D, a point in 1D) seen from its owner element.
///
/// Face `owner_local` of an element is the facet opposite local vertex
/// `owner_local`. The neighbor view is matched vertex by vertex: `nv[i]` is
/// the neighbor-side vertex identified with `v[i]` (equal for ordinary
/// interior faces, a periodic partner otherwise). Coordinates on the neighbor
/// side plus `shift` give owner-side coordinates.
struct Face {
  int owner = -1;
  int owner_local = -1;
  int neighbor = -1;
  int neighbor_local = -1;
  std::array<int, 2> v{-1, -1};
  std::array<int, 2> nv{-1, -1};
  Vec2 shift = Vec2::Zero();

  bool boundary() const { return neighbor < 0; }
  bool periodic() const { return !boundary() && (v != nv); }
};

/// Per-vertex motion constraint used by the mesh mover.
struct VertexConstraint {
  bool fix_x = false;
  bool fix_y = false;
  int group = -1;  // periodic identification class (vertices that move together)
};

/// Simplicial mesh with fixed connectivity. Vertex positions stored here are
/// the construction-time positions; moving positions live outside the mesh.
class SimplicialMesh {
 public:
  SimplicialMesh(int dim, std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements,
                 std::vector<Face> faces, std::vector<VertexConstraint> constraints, Box box,
                 std::array<bool, 2> periodic);

  int dim() const { return dim_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int faces_per_element() const { return dim_ + 1; }
  int vertices_per_element() const { return dim_ + 1; }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::array<int, 3>& element(int k) const { return elements_[k]; }
  const std::vector<std::array<int, 3>>& elements() const { return elements_; }
  const Face& face(int f) const { return faces_[f]; }
  const std::vector<Face>& faces() const { return faces_; }
  /// Global face index of local face `j` of element `k`.
  int element_face(int k, int j) const { return element_faces_[k][j]; }
  const VertexConstraint& constraint(int v) const { return constraints_[v]; }
  const std::vector<VertexConstraint>& constraints() const { return constraints_; }
  const Box& box() const { return box_; }
  bool periodic(int axis) const { return periodic_[axis]; }
  bool any_periodic() const { return periodic_[0] || periodic_[1]; }

  /// Local index of global vertex `v` inside element `k`, or -1.
  int local_vertex(int k, int v) const;

 private:
  int dim_;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<Face> faces_;
  std::vector<std::array<int, 3>> element_faces_;
  std::vector<VertexConstraint> constraints_;
  Box box_;
  std::array<bool, 2> periodic_;
};

/// Structured mesh on a box. For the 2D pattern each quad cell is split into
/// four triangles about its centroid.
SimplicialMesh build_structured_mesh(const Box& box, std::array<int, 2> n_cells, MeshPattern pattern,
                                     std::array<bool, 2> periodic = {false, false});

/// Builds faces by matching shared facets; unmatched facets become boundary faces.
SimplicialMesh mesh_from_connectivity(int dim, std::vector<Vec2> vertices,
                                      std::vector<std::array<int, 3>> elements);

// Geometric quantities. All take an explicit position array so the same
// connectivity can be queried at any time level.

double element_measure(const SimplicialMesh& mesh, std::span<const Vec2> x, int k);
/// Facet measure of local face j of element k (1 in 1D).
double face_measure(const SimplicialMesh& mesh, std::span<const Vec2> x, int k, int j);
/// Outward unit normal of local face j of element k.
Vec2 outward_normal(const SimplicialMesh& mesh, std::span<const Vec2> x, int k, int j);
/// Distance from local face j to the opposite vertex: d|K|/|e|.
double edge_height(const SimplicialMesh& mesh, std::span<const Vec2> x, int k, int j);
Vec2 element_centroid(const SimplicialMesh& mesh, std::span<const Vec2> x, int k);

/// Affine map data of element k: x = x0 + jacobian * xi.
struct AffineMap {
  Vec2 origin = Vec2::Zero();
  Mat2 jacobian = Mat2::Identity();  // 1D: only (0,0) meaningful
  Mat2 inverse = Mat2::Identity();
  double det = 1.0;
};
AffineMap affine_map(const SimplicialMesh& mesh, std::span<const Vec2> x, int k);

/// max over elements of (1/|K|) sum_e |e|
double max_edge_sum_ratio(const SimplicialMesh& mesh, std::span<const Vec2> x);
/// min over (K, e) of the element height
double min_edge_height(const SimplicialMesh& mesh, std::span<const Vec2> x);

struct MeshReport {
  double min_measure = 0.0;
  double min_height = 0.0;
  std::vector<int> inverted;
  bool ok() const { return inverted.empty() && min_measure > 0.0; }
};
MeshReport validate_mesh(const SimplicialMesh& mesh, std::span<const Vec2> x);

/// Mesh between two time levels with vertices moving linearly in time.
class MovingMesh {
 public:
  MovingMesh(const SimplicialMesh& mesh, std::vector<Vec2> x_old, std::vector<Vec2> x_new, double t_n,
             double t_next);

  const SimplicialMesh& mesh() const { return *mesh_; }
  const std::vector<Vec2>& x_old() const { return x_old_; }
  const std::vector<Vec2>& x_new() const { return x_new_; }
  double t_n() const { return t_n_; }
  double t_next() const { return t_next_; }
  double dt() const { return t_next_ - t_n_; }

  std::vector<Vec2> positions_at(double t) const;
  /// Nodal velocities (x_new - x_old)/dt.
  const std::vector<Vec2>& nodal_velocity() const { return velocity_; }
  /// Piecewise-linear mesh velocity at physical point p of element k at time t.
  Vec2 mesh_velocity(const Vec2& p, double t, int k) const;

 private:
  const SimplicialMesh* mesh_;
  std::vector<Vec2> x_old_;
  std::vector<Vec2> x_new_;
  std::vector<Vec2> velocity_;
  double t_n_;
  double t_next_;
};

/// Barycentric coordinates of p in element k.
std::array<double, 3> barycentric(const SimplicialMesh& mesh, std::span<const Vec2> x, int k, const Vec2& p);

// Snapshot I/O: header `dim N_v N`, vertex lines, element lines.
void write_mesh_snapshot(std::ostream& os, const SimplicialMesh& mesh, std::span<const Vec2> x);
struct MeshSnapshot {
  int dim = 1;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> elements;
};
MeshSnapshot read_mesh_snapshot(std::istream& is);

}  // namespace mmdg
