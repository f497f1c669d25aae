#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mmdg/dg_space.hpp"
#include "mmdg/geometry.hpp"

namespace mmdg {

/// Per-element symmetric d x d matrices (1D uses entry (0,0) only; the
/// remaining entries are zero).
struct MetricField {
  int dim = 1;
  std::vector<Mat2> m;
};

struct RecoveredHessian {
  int dim = 1;
  std::vector<Mat2> h;
  std::vector<Mat2> abs_h;  // Q diag(|lambda|) Q^T
};

/// Least-squares quadratic fit to cell averages over an element patch.
/// Patches are grown through faces (periodic faces included, with the
/// coordinate shift applied).
class HessianRecovery {
 public:
  explicit HessianRecovery(const SimplicialMesh& mesh);

  RecoveredHessian recover(std::span<const double> cell_averages, std::span<const Vec2> x) const;
  RecoveredHessian recover(const DGField& u, int component, std::span<const Vec2> x) const;

 private:
  struct PatchEntry {
    int element;
    Vec2 shift;  // added to the element's coordinates to express them in the patch frame
  };
  std::vector<PatchEntry> patch(int k, int layers) const;
  bool fit(int k, const std::vector<PatchEntry>& entries, std::span<const double> values, std::span<const Vec2> x,
           Mat2& h) const;

  const SimplicialMesh* mesh_;
  std::vector<std::vector<PatchEntry>> patches_;
};

/// Absolute value of a symmetric matrix via its eigen-decomposition.
Mat2 abs_symmetric(const Mat2& a, int dim);

enum class RootMethod { bisection, newton };

struct BetaResult {
  double beta = 0.0;
  double residual = 0.0;  // relative residual of the defining equation
  bool degenerate = false;
};

/// Solves sum |K| det(beta I + |H_K|)^{2/(d+4)} = 2 sum |K| det(|H_K|)^{2/(d+4)}.
/// Returns beta_floor with the degenerate flag when the right-hand side vanishes.
BetaResult solve_beta(const SimplicialMesh& mesh, std::span<const Vec2> x, std::span<const Mat2> abs_h,
                      RootMethod method = RootMethod::newton, double beta_floor = 1e-8);

/// M_K = det(beta I + |H_K|)^{-1/(d+4)} (beta I + |H_K|)
MetricField metric_from_hessian(std::span<const Mat2> abs_h, double beta, int dim);

/// Divides by the largest absolute entry over the whole field.
MetricField normalize_metric(const MetricField& m);

/// Intersection of two SPD matrices (the smallest ellipsoid-sense dominating matrix).
Mat2 intersect(const Mat2& a, const Mat2& b, int dim);

/// Element-wise intersection of the two fields, each normalized first.
MetricField metric_intersection(const MetricField& m1, const MetricField& m2);

/// Volume-weighted averaging with face neighbors, repeated `passes` times.
MetricField smooth_metric(const MetricField& m, const SimplicialMesh& mesh, std::span<const Vec2> x, int passes);

bool is_spd(const Mat2& m, int dim);
double metric_det(const Mat2& m, int dim);

/// Diagnostic dump: one element per line, row-major entries.
void write_metric(std::ostream& os, const MetricField& m);

}  // namespace mmdg
