#include "mmdg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace mmdg {

namespace {

std::array<int, 2> facet_vertices(int dim, const std::array<int, 3>& el, int j) {
  if (dim == 1) return {el[1 - j], -1};
  return {el[(j + 1) % 3], el[(j + 2) % 3]};
}

double signed_measure(int dim, std::span<const Vec2> x, const std::array<int, 3>& el) {
  if (dim == 1) return x[el[1]].x() - x[el[0]].x();
  const Vec2 a = x[el[1]] - x[el[0]];
  const Vec2 b = x[el[2]] - x[el[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

// Groups facets by a canonical key and turns matched pairs into faces.
std::vector<Face> match_faces(int dim, std::span<const Vec2> x, const std::vector<std::array<int, 3>>& elements,
                              const std::vector<int>& canonical) {
  std::map<std::array<int, 2>, std::vector<std::pair<int, int>>> facets;
  for (int k = 0; k < static_cast<int>(elements.size()); ++k) {
    for (int j = 0; j <= dim; ++j) {
      auto fv = facet_vertices(dim, elements[k], j);
      std::array<int, 2> key{canonical[fv[0]], dim == 1 ? -1 : canonical[fv[1]]};
      if (dim == 2 && key[0] > key[1]) std::swap(key[0], key[1]);
      facets[key].emplace_back(k, j);
    }
  }
  std::vector<Face> faces;
  faces.reserve(facets.size());
  for (const auto& [key, views] : facets) {
    if (views.size() > 2) throw TopologyError("facet shared by more than two elements");
    Face f;
    f.owner = views[0].first;
    f.owner_local = views[0].second;
    f.v = facet_vertices(dim, elements[f.owner], f.owner_local);
    f.nv = f.v;
    if (views.size() == 2) {
      f.neighbor = views[1].first;
      f.neighbor_local = views[1].second;
      const auto w = facet_vertices(dim, elements[f.neighbor], f.neighbor_local);
      if (dim == 1) {
        f.nv = {w[0], -1};
      } else if (canonical[w[0]] == canonical[f.v[0]]) {
        f.nv = {w[0], w[1]};
      } else {
        f.nv = {w[1], w[0]};
      }
      f.shift = x[f.v[0]] - x[f.nv[0]];
    }
    faces.push_back(f);
  }
  return faces;
}

}  // namespace

SimplicialMesh::SimplicialMesh(int dim, std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements,
                               std::vector<Face> faces, std::vector<VertexConstraint> constraints, Box box,
                               std::array<bool, 2> periodic)
    : dim_(dim),
      vertices_(std::move(vertices)),
      elements_(std::move(elements)),
      faces_(std::move(faces)),
      constraints_(std::move(constraints)),
      box_(box),
      periodic_(periodic) {
  if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("mesh dimension must be 1 or 2");
  if (constraints_.size() != vertices_.size()) throw std::invalid_argument("constraint count mismatch");
  element_faces_.assign(elements_.size(), {-1, -1, -1});
  for (int f = 0; f < num_faces(); ++f) {
    const Face& fc = faces_[f];
    element_faces_[fc.owner][fc.owner_local] = f;
    if (!fc.boundary()) element_faces_[fc.neighbor][fc.neighbor_local] = f;
  }
  for (int k = 0; k < num_elements(); ++k) {
    for (int j = 0; j <= dim_; ++j) {
      if (element_faces_[k][j] < 0) throw TopologyError("element facet without a face");
    }
    if (signed_measure(dim_, vertices_, elements_[k]) <= 0.0) {
      throw GeometryError("element " + std::to_string(k) + " has non-positive measure");
    }
  }
}

int SimplicialMesh::local_vertex(int k, int v) const {
  for (int i = 0; i <= dim_; ++i) {
    if (elements_[k][i] == v) return i;
  }
  return -1;
}

SimplicialMesh build_structured_mesh(const Box& box, std::array<int, 2> n_cells, MeshPattern pattern,
                                     std::array<bool, 2> periodic) {
  if (pattern == MeshPattern::interval) {
    const int n = n_cells[0];
    if (n < 1) throw std::invalid_argument("cell count must be at least 1");
    if (!(box.hi.x() > box.lo.x())) throw std::invalid_argument("degenerate box");
    const double h = (box.hi.x() - box.lo.x()) / n;
    std::vector<Vec2> x(n + 1);
    for (int i = 0; i <= n; ++i) x[i] = Vec2(i == n ? box.hi.x() : box.lo.x() + i * h, 0.0);
    std::vector<std::array<int, 3>> el(n);
    for (int i = 0; i < n; ++i) el[i] = {i, i + 1, -1};
    std::vector<int> canonical(n + 1);
    for (int i = 0; i <= n; ++i) canonical[i] = (periodic[0] && i == n) ? 0 : i;
    auto faces = match_faces(1, x, el, canonical);
    std::vector<VertexConstraint> cons(n + 1);
    for (int i = 0; i <= n; ++i) cons[i].group = canonical[i];
    cons[0].fix_x = cons[n].fix_x = true;
    return SimplicialMesh(1, std::move(x), std::move(el), std::move(faces), std::move(cons), box,
                          {periodic[0], false});
  }

  const int nx = n_cells[0];
  const int ny = n_cells[1];
  if (nx < 1 || ny < 1) throw std::invalid_argument("cell count must be at least 1");
  // with two cells the torus has two distinct edges between the same vertex pair
  if ((periodic[0] && nx < 3) || (periodic[1] && ny < 3)) {
    throw std::invalid_argument("periodic direction needs at least 3 cells");
  }
  if (!(box.hi.x() > box.lo.x()) || !(box.hi.y() > box.lo.y())) throw std::invalid_argument("degenerate box");
  const double hx = (box.hi.x() - box.lo.x()) / nx;
  const double hy = (box.hi.y() - box.lo.y()) / ny;
  const int n_grid = (nx + 1) * (ny + 1);
  auto gid = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Vec2> x(n_grid + nx * ny);
  std::vector<int> canonical(x.size());
  std::vector<VertexConstraint> cons(x.size());
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double px = i == nx ? box.hi.x() : box.lo.x() + i * hx;
      const double py = j == ny ? box.hi.y() : box.lo.y() + j * hy;
      x[gid(i, j)] = Vec2(px, py);
      const int ic = (periodic[0] && i == nx) ? 0 : i;
      const int jc = (periodic[1] && j == ny) ? 0 : j;
      canonical[gid(i, j)] = gid(ic, jc);
      cons[gid(i, j)].fix_x = (i == 0 || i == nx);
      cons[gid(i, j)].fix_y = (j == 0 || j == ny);
      cons[gid(i, j)].group = gid(ic, jc);
    }
  }
  std::vector<std::array<int, 3>> el;
  el.reserve(4 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int m = n_grid + j * nx + i;
      x[m] = Vec2(box.lo.x() + (i + 0.5) * hx, box.lo.y() + (j + 0.5) * hy);
      canonical[m] = m;
      cons[m].group = m;
      const int c00 = gid(i, j), c10 = gid(i + 1, j), c11 = gid(i + 1, j + 1), c01 = gid(i, j + 1);
      el.push_back({c00, c10, m});
      el.push_back({c10, c11, m});
      el.push_back({c11, c01, m});
      el.push_back({c01, c00, m});
    }
  }
  auto faces = match_faces(2, x, el, canonical);
  return SimplicialMesh(2, std::move(x), std::move(el), std::move(faces), std::move(cons), box, periodic);
}

SimplicialMesh mesh_from_connectivity(int dim, std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("mesh dimension must be 1 or 2");
  if (vertices.empty()) throw std::invalid_argument("empty mesh");
  Box box{vertices[0], vertices[0]};
  for (const auto& p : vertices) {
    box.lo = box.lo.cwiseMin(p);
    box.hi = box.hi.cwiseMax(p);
  }
  std::vector<int> canonical(vertices.size());
  std::vector<VertexConstraint> cons(vertices.size());
  for (int i = 0; i < static_cast<int>(vertices.size()); ++i) {
    canonical[i] = i;
    cons[i].group = i;
    const auto& p = vertices[i];
    cons[i].fix_x = (p.x() == box.lo.x() || p.x() == box.hi.x());
    cons[i].fix_y = dim == 2 && (p.y() == box.lo.y() || p.y() == box.hi.y());
  }
  auto faces = match_faces(dim, vertices, elements, canonical);
  return SimplicialMesh(dim, std::move(vertices), std::move(elements), std::move(faces), std::move(cons), box,
                        {false, false});
}

double element_measure(const SimplicialMesh& mesh, std::span<const Vec2> x, int k) {
  const double m = signed_measure(mesh.dim(), x, mesh.element(k));
  if (m <= 0.0) throw GeometryError("degenerate or inverted element " + std::to_string(k));
  return m;
}

double face_measure(const SimplicialMesh& mesh, std::span<const Vec2> x, int k, int j) {
  if (mesh.dim() == 1) return 1.0;
  const auto fv = facet_vertices(2, mesh.element(k), j);
  return (x[fv[1]] - x[fv[0]]).norm();
}

Vec2 outward_normal(const SimplicialMesh& mesh, std::span<const Vec2> x, int k, int j) {
  if (mesh.dim() == 1) return Vec2(j == 0 ? 1.0 : -1.0, 0.0);
  const auto fv = facet_vertices(2, mesh.element(k), j);
  const Vec2 d = x[fv[1]] - x[fv[0]];
  const double len = d.norm();
  if (len <= 0.0) throw GeometryError("zero-length edge");
  return Vec2(d.y() / len, -d.x() / len);
}

double edge_height(const SimplicialMesh& mesh, std::span<const Vec2> x, int k, int j) {
  return mesh.dim() * element_measure(mesh, x, k) / face_measure(mesh, x, k, j);
}

Vec2 element_centroid(const SimplicialMesh& mesh, std::span<const Vec2> x, int k) {
  const auto& el = mesh.element(k);
  Vec2 c = Vec2::Zero();
  for (int i = 0; i <= mesh.dim(); ++i) c += x[el[i]];
  return c / (mesh.dim() + 1);
}

AffineMap affine_map(const SimplicialMesh& mesh, std::span<const Vec2> x, int k) {
  const auto& el = mesh.element(k);
  AffineMap map;
  map.origin = x[el[0]];
  if (mesh.dim() == 1) {
    const double h = x[el[1]].x() - x[el[0]].x();
    map.jacobian << h, 0.0, 0.0, 1.0;
    map.det = h;
    if (h <= 0.0) throw GeometryError("degenerate or inverted element " + std::to_string(k));
    map.inverse << 1.0 / h, 0.0, 0.0, 1.0;
    return map;
  }
  map.jacobian.col(0) = x[el[1]] - x[el[0]];
  map.jacobian.col(1) = x[el[2]] - x[el[0]];
  map.det = map.jacobian.determinant();
  if (map.det <= 0.0) throw GeometryError("degenerate or inverted element " + std::to_string(k));
  map.inverse = map.jacobian.inverse();
  return map;
}

double max_edge_sum_ratio(const SimplicialMesh& mesh, std::span<const Vec2> x) {
  double worst = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    double s = 0.0;
    for (int j = 0; j <= mesh.dim(); ++j) s += face_measure(mesh, x, k, j);
    worst = std::max(worst, s / element_measure(mesh, x, k));
  }
  return worst;
}

double min_edge_height(const SimplicialMesh& mesh, std::span<const Vec2> x) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int j = 0; j <= mesh.dim(); ++j) m = std::min(m, edge_height(mesh, x, k, j));
  }
  return m;
}

MeshReport validate_mesh(const SimplicialMesh& mesh, std::span<const Vec2> x) {
  MeshReport r;
  r.min_measure = std::numeric_limits<double>::infinity();
  r.min_height = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const double m = signed_measure(mesh.dim(), x, mesh.element(k));
    r.min_measure = std::min(r.min_measure, m);
    if (m <= 0.0) {
      r.inverted.push_back(k);
      continue;
    }
    for (int j = 0; j <= mesh.dim(); ++j) {
      r.min_height = std::min(r.min_height, mesh.dim() * m / face_measure(mesh, x, k, j));
    }
  }
  return r;
}

std::array<double, 3> barycentric(const SimplicialMesh& mesh, std::span<const Vec2> x, int k, const Vec2& p) {
  const AffineMap map = affine_map(mesh, x, k);
  const Vec2 xi = map.inverse * (p - map.origin);
  if (mesh.dim() == 1) return {1.0 - xi.x(), xi.x(), 0.0};
  return {1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
}

MovingMesh::MovingMesh(const SimplicialMesh& mesh, std::vector<Vec2> x_old, std::vector<Vec2> x_new, double t_n,
                       double t_next)
    : mesh_(&mesh), x_old_(std::move(x_old)), x_new_(std::move(x_new)), t_n_(t_n), t_next_(t_next) {
  if (x_old_.size() != x_new_.size() || static_cast<int>(x_old_.size()) != mesh.num_vertices()) {
    throw std::invalid_argument("position arrays do not match the mesh");
  }
  if (!(t_next_ > t_n_)) throw std::invalid_argument("time slab must have positive length");
  velocity_.resize(x_old_.size());
  const double dt = t_next_ - t_n_;
  for (std::size_t i = 0; i < x_old_.size(); ++i) velocity_[i] = (x_new_[i] - x_old_[i]) / dt;
}

std::vector<Vec2> MovingMesh::positions_at(double t) const {
  if (t < t_n_ || t > t_next_) throw std::out_of_range("time outside the mesh slab");
  if (t == t_n_) return x_old_;
  if (t == t_next_) return x_new_;
  const double theta = (t - t_n_) / (t_next_ - t_n_);
  std::vector<Vec2> x(x_old_.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - theta) * x_old_[i] + theta * x_new_[i];
  return x;
}

Vec2 MovingMesh::mesh_velocity(const Vec2& p, double t, int k) const {
  const auto x = positions_at(t);
  const auto lam = barycentric(*mesh_, x, k, p);
  constexpr double tol = 1e-12;
  for (int i = 0; i <= mesh_->dim(); ++i) {
    if (lam[i] < -tol) throw std::invalid_argument("point outside element");
  }
  Vec2 v = Vec2::Zero();
  for (int i = 0; i <= mesh_->dim(); ++i) v += lam[i] * velocity_[mesh_->element(k)[i]];
  return v;
}

void write_mesh_snapshot(std::ostream& os, const SimplicialMesh& mesh, std::span<const Vec2> x) {
  const int d = mesh.dim();
  os << d << ' ' << mesh.num_vertices() << ' ' << mesh.num_elements() << '\n';
  os << std::setprecision(17);
  for (const auto& p : x) {
    os << p.x();
    if (d == 2) os << ' ' << p.y();
    os << '\n';
  }
  for (const auto& el : mesh.elements()) {
    for (int i = 0; i <= d; ++i) os << (i ? " " : "") << el[i];
    os << '\n';
  }
}

MeshSnapshot read_mesh_snapshot(std::istream& is) {
  MeshSnapshot s;
  int nv = 0, ne = 0;
  if (!(is >> s.dim >> nv >> ne) || (s.dim != 1 && s.dim != 2) || nv < 0 || ne < 0) {
    throw std::runtime_error("malformed mesh snapshot header");
  }
  s.vertices.resize(nv, Vec2::Zero());
  for (auto& p : s.vertices) {
    is >> p.x();
    if (s.dim == 2) is >> p.y();
  }
  s.elements.assign(ne, {-1, -1, -1});
  for (auto& el : s.elements) {
    for (int i = 0; i <= s.dim; ++i) is >> el[i];
  }
  if (!is) throw std::runtime_error("truncated mesh snapshot");
  return s;
}

}  // namespace mmdg
