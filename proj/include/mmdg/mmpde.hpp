#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmdg/geometry.hpp"
#include "mmdg/metric.hpp"

namespace mmdg {

/// Mesh mover settings. The computational coordinates follow the gradient
/// flow xi_t = -(1/tau) P^{-1} dI/dxi, P a weighted graph Laplacian scaled so
/// that a unit pseudo-step is roughly a Newton step. One call integrates the
/// flow over a physical interval dt with n_sweeps explicit steps of size
/// min(1, dt / (tau n_sweeps)).
struct MmpdeParams {
  double tau = 1e-2;  // relaxation time of the mesh flow
  int n_sweeps = 4;
  double theta = 1.0 / 3.0;
  double p = 1.5;
  int n_smooth = 2;
  int max_retries = 12;
  /// Optional per-sweep displacement cap as a fraction of the smallest
  /// adjacent height; inversions are otherwise handled by halving tau.
  double max_move = std::numeric_limits<double>::infinity();
};

struct MeshAdaptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Meshing energy sum_K |K| G(J_K, det J_K, M_K) on a fixed physical mesh
/// `x`, as a function of the computational vertex coordinates xi. J_K is
/// the Jacobian of the affine map from the physical to the computational
/// element, so M_K stays attached to the physical element it was computed on.
class MeshEnergy {
 public:
  MeshEnergy(const SimplicialMesh& mesh, std::span<const Vec2> x, double theta, double p);

  double energy(std::span<const Vec2> xi, const MetricField& m) const;
  /// d energy / d xi_i for every vertex, plus the per-element weight
  /// |K| G / h_xi^2 used to build the preconditioner.
  void gradient(std::span<const Vec2> xi, const MetricField& m, std::vector<Vec2>& grad,
                std::vector<double>& weight) const;

 private:
  double element_energy(std::span<const Vec2> xi, const Mat2& m, int k, Mat2* grad_edges) const;

  const SimplicialMesh* mesh_;
  std::vector<Mat2> inv_edges_;  // E_K^{-1} of the physical elements
  std::vector<double> measure_;
  double theta_;
  double p_;
};

/// Relaxes the computational coordinates, starting from `xi_c`, toward the
/// minimiser of the energy on the physical mesh `x` over a time span dt
/// (infinite: unit pseudo-steps), then returns the new physical mesh: x as a
/// piecewise-linear function of xi, evaluated at xi_c.
std::vector<Vec2> adapt_mesh(const SimplicialMesh& mesh, std::span<const Vec2> xi_c, std::span<const Vec2> x,
                             const MetricField& m, const MmpdeParams& params,
                             double dt = std::numeric_limits<double>::infinity());

/// Evaluates the piecewise-linear map defined by (from[i] -> to[i]) on the
/// mesh connectivity at the given points. Throws MeshAdaptError if a point
/// lies outside the `from` mesh.
std::vector<Vec2> interpolate_map(const SimplicialMesh& mesh, std::span<const Vec2> from, std::span<const Vec2> to,
                                  std::span<const Vec2> points);

/// (x_new - x_old) / dt_tilde
std::vector<Vec2> nodal_velocity(std::span<const Vec2> x_old, std::span<const Vec2> x_new, double dt_tilde);

}  // namespace mmdg
