#pragma once

#include <span>
#include <string>
#include <vector>

#include "mmdg/dg_space.hpp"
#include "mmdg/flux.hpp"

namespace mmdg {

/// Aggregation scope of the alpha-function.
enum class AlphaPolicy { pointwise = 0, per_edge = 1, per_element = 2, global = 3 };

std::string to_string(AlphaPolicy p);
AlphaPolicy parse_alpha_policy(const std::string& s);

/// Data at one face Gauss point. The normal points out of the interior side.
struct EdgeTracePoint {
  State u_int;
  State u_ext;
  Vec2 x = Vec2::Zero();
  Vec2 n = Vec2::Zero();
  Vec2 xdot = Vec2::Zero();
};

/// max over {int, ext} of the spectral radius of d((F - U xdot) n)/dU.
double alpha_pointwise(const FluxModel& model, const EdgeTracePoint& p, double t);

/// Pointwise alpha at every face Gauss point.
struct AlphaTable {
  int num_faces = 0;
  int points_per_face = 0;
  std::vector<double> values;

  double operator()(int f, int g) const { return values[f * points_per_face + g]; }
  double& operator()(int f, int g) { return values[f * points_per_face + g]; }
};

/// Collects trace data at face Gauss points. Exterior traces of boundary
/// faces copy the interior trace (transmissive closure).
EdgeTracePoint face_trace(const DGSpace& space, const DGField& u, std::span<const Vec2> x,
                          std::span<const Vec2> velocity, int f, int g);

/// Pointwise alpha table; an empty velocity span means a stationary mesh.
AlphaTable alpha_point_table(const DGSpace& space, const FluxModel& model, const DGField& u, std::span<const Vec2> x,
                             std::span<const Vec2> velocity, double t);

/// Alpha aggregated under a policy. The per-element scope of a face is the
/// union of the faces of the (one or two) elements sharing it, so the value
/// is single valued on every face.
class AggregatedAlpha {
 public:
  AggregatedAlpha(AlphaPolicy policy, AlphaTable table, const SimplicialMesh& mesh);

  AlphaPolicy policy() const { return policy_; }
  double value(int f, int g) const;
  double edge_max(int f) const { return edge_max_[f]; }
  double element_max(int k) const { return element_max_[k]; }
  double global_max() const { return global_max_; }
  const AlphaTable& table() const { return table_; }
  int num_faces() const { return table_.num_faces; }
  int points_per_face() const { return table_.points_per_face; }

 private:
  AlphaPolicy policy_;
  AlphaTable table_;
  const SimplicialMesh* mesh_;
  std::vector<double> edge_max_;
  std::vector<double> element_max_;
  double global_max_ = 0.0;
};

AggregatedAlpha alpha_aggregate(AlphaPolicy policy, const AlphaTable& table, const SimplicialMesh& mesh);

}  // namespace mmdg
