#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "mmdg/geometry.hpp"

namespace testing {

// Random valid mesh: a structured mesh with interior vertices jittered.
// Boundary-constrained coordinates stay put so the box is preserved.
inline std::vector<mmdg::Vec2> jitter(const mmdg::SimplicialMesh& mesh, std::mt19937& rng, double amount) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const mmdg::Box& b = mesh.box();
  double h = b.hi.x() - b.lo.x();
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int j = 0; j < mesh.faces_per_element(); ++j) {
      h = std::min(h, mmdg::edge_height(mesh, mesh.vertices(), k, j));
    }
  }
  while (true) {
    std::vector<mmdg::Vec2> x = mesh.vertices();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      const auto& c = mesh.constraint(v);
      if (!c.fix_x) x[v].x() += amount * h * u(rng);
      if (mesh.dim() == 2 && !c.fix_y) x[v].y() += amount * h * u(rng);
    }
    if (mesh.any_periodic()) {
      // periodic copies follow their leader
      for (int v = 0; v < mesh.num_vertices(); ++v) {
        const int g = mesh.constraint(v).group;
        if (g != v && g >= 0) x[v] = x[g] + (mesh.vertices()[v] - mesh.vertices()[g]);
      }
    }
    if (mmdg::validate_mesh(mesh, x).ok()) return x;
  }
}

inline mmdg::SimplicialMesh random_structured(std::mt19937& rng, int dim) {
  std::uniform_int_distribution<int> n(2, dim == 1 ? 40 : 7);
  std::uniform_real_distribution<double> len(0.5, 3.0);
  mmdg::Box box{{0.0, 0.0}, {len(rng), dim == 1 ? 0.0 : len(rng)}};
  if (dim == 1) return mmdg::build_structured_mesh(box, {n(rng), 1}, mmdg::MeshPattern::interval);
  return mmdg::build_structured_mesh(box, {n(rng), n(rng)}, mmdg::MeshPattern::four_triangles_per_cell);
}

}  // namespace testing
