#include "mmdg/alpha.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmdg {

std::string to_string(AlphaPolicy p) {
  switch (p) {
    case AlphaPolicy::pointwise:
      return "pointwise";
    case AlphaPolicy::per_edge:
      return "per_edge";
    case AlphaPolicy::per_element:
      return "per_element";
    case AlphaPolicy::global:
      return "global";
  }
  return "unknown";
}

AlphaPolicy parse_alpha_policy(const std::string& s) {
  if (s == "pointwise" || s == "p") return AlphaPolicy::pointwise;
  if (s == "per_edge" || s == "edge" || s == "e") return AlphaPolicy::per_edge;
  if (s == "per_element" || s == "element" || s == "k") return AlphaPolicy::per_element;
  if (s == "global" || s == "h") return AlphaPolicy::global;
  throw std::invalid_argument("unknown alpha policy: " + s);
}

double alpha_pointwise(const FluxModel& model, const EdgeTracePoint& p, double t) {
  return std::max(model.max_abs_eig(p.u_int, p.x, t, p.n, p.xdot), model.max_abs_eig(p.u_ext, p.x, t, p.n, p.xdot));
}

EdgeTracePoint face_trace(const DGSpace& space, const DGField& u, std::span<const Vec2> x,
                          std::span<const Vec2> velocity, int f, int g) {
  const Face& fc = space.mesh().face(f);
  EdgeTracePoint p;
  p.u_int.resize(u.components);
  p.u_ext.resize(u.components);
  evaluate_trace(space, u, f, TraceSide::interior, g, {p.u_int.data(), std::size_t(u.components)});
  if (fc.boundary()) {
    p.u_ext = p.u_int;
  } else {
    evaluate_trace(space, u, f, TraceSide::exterior, g, {p.u_ext.data(), std::size_t(u.components)});
  }
  p.x = space.face_point(f, g, x);
  p.n = outward_normal(space.mesh(), x, fc.owner, fc.owner_local);
  p.xdot = velocity.empty() ? Vec2::Zero() : space.face_interpolate(f, g, velocity);
  return p;
}

AlphaTable alpha_point_table(const DGSpace& space, const FluxModel& model, const DGField& u, std::span<const Vec2> x,
                             std::span<const Vec2> velocity, double t) {
  AlphaTable table;
  table.num_faces = space.mesh().num_faces();
  table.points_per_face = space.face_points();
  table.values.resize(static_cast<std::size_t>(table.num_faces) * table.points_per_face);
  for (int f = 0; f < table.num_faces; ++f) {
    for (int g = 0; g < table.points_per_face; ++g) {
      table(f, g) = alpha_pointwise(model, face_trace(space, u, x, velocity, f, g), t);
    }
  }
  return table;
}

AggregatedAlpha::AggregatedAlpha(AlphaPolicy policy, AlphaTable table, const SimplicialMesh& mesh)
    : policy_(policy), table_(std::move(table)), mesh_(&mesh) {
  if (table_.num_faces == 0 || mesh.num_elements() == 0) throw std::invalid_argument("empty alpha table");
  if (table_.num_faces != mesh.num_faces()) throw std::invalid_argument("alpha table does not match mesh");
  edge_max_.assign(table_.num_faces, 0.0);
  for (int f = 0; f < table_.num_faces; ++f) {
    for (int g = 0; g < table_.points_per_face; ++g) edge_max_[f] = std::max(edge_max_[f], table_(f, g));
    global_max_ = std::max(global_max_, edge_max_[f]);
  }
  element_max_.assign(mesh.num_elements(), 0.0);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int j = 0; j < mesh.faces_per_element(); ++j) {
      element_max_[k] = std::max(element_max_[k], edge_max_[mesh.element_face(k, j)]);
    }
  }
}

double AggregatedAlpha::value(int f, int g) const {
  switch (policy_) {
    case AlphaPolicy::pointwise:
      return table_(f, g);
    case AlphaPolicy::per_edge:
      return edge_max_[f];
    case AlphaPolicy::per_element: {
      const Face& fc = mesh_->face(f);
      double a = element_max_[fc.owner];
      if (!fc.boundary()) a = std::max(a, element_max_[fc.neighbor]);
      return a;
    }
    case AlphaPolicy::global:
      return global_max_;
  }
  return global_max_;
}

AggregatedAlpha alpha_aggregate(AlphaPolicy policy, const AlphaTable& table, const SimplicialMesh& mesh) {
  return AggregatedAlpha(policy, table, mesh);
}

}  // namespace mmdg
