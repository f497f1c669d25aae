#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mmdg/alpha.hpp"
#include "mmdg/geometry.hpp"

namespace mmdg {

enum class CflFormula { classic_height, classic_edge_sum, coupled_edge, gauss_weighted, two_mesh };

/// Named (alpha_CFL, alpha_LF) pairings.
struct PolicyPair {
  AlphaPolicy cfl = AlphaPolicy::per_edge;
  AlphaPolicy lf = AlphaPolicy::per_edge;
};

struct CflConfig {
  double c_cfl = 0.3;
  PolicyPair policies;
  CflFormula formula = CflFormula::two_mesh;
  double dt_max = std::numeric_limits<double>::infinity();

  /// alpha_CFL dominates alpha_LF by construction when its scope is at least as coarse.
  bool dominance_by_construction() const {
    return static_cast<int>(policies.cfl) >= static_cast<int>(policies.lf);
  }
};

/// Preset name: "ee", "he", "hh" or the non-dominated "eh" (CFL letter first).
PolicyPair parse_preset(const std::string& name);
std::string preset_name(const PolicyPair& p);
/// Default Courant number per polynomial degree (0.3 / 0.15 / 0.1 for k = 1 / 2 / 3).
double default_cfl_number(int degree);

struct DtReport {
  double dt = 0.0;
  int argmax_element = -1;
  std::vector<double> element_bounds;  // (1/|K|) sum_e alpha_e |e| per element
  bool unbounded = false;
  bool dominance_ok = true;
  std::string cap_reason = "none";
};

/// C sigma_min / alpha_h; +inf when alpha_h == 0.
double dt_classic_height(double alpha_h, double sigma_min, double c_cfl);
/// C / (alpha_h max_K (1/|K|) sum_e |e|)
double dt_classic_edge_sum(const SimplicialMesh& mesh, std::span<const Vec2> x, double alpha_h, double c_cfl);
/// C / max_K sum_e alpha_e |e|/|K| with one alpha per face.
DtReport dt_coupled(const SimplicialMesh& mesh, std::span<const Vec2> x, std::span<const double> face_alpha,
                    double c_cfl);
/// Stability bound for the P0 explicit Euler scheme: 1 / max_K (1/|K|) sum_e |e| sum_G w_G alpha(x_G).
DtReport dt_gauss_weighted(const SimplicialMesh& mesh, std::span<const Vec2> x, const AggregatedAlpha& alpha,
                           std::span<const double> face_weights);
/// Two-mesh bound: C / max_K max(sum_e alpha|e|/|K^n|, sum_e alpha|e|/|K^{n+1}|).
DtReport dt_two_mesh(const SimplicialMesh& mesh, std::span<const Vec2> x_old, std::span<const Vec2> x_new,
                     std::span<const double> face_alpha, double c_cfl);

/// Weighted face average sum_G w_G alpha(f, G) for every face.
std::vector<double> face_alpha_values(const AggregatedAlpha& alpha, std::span<const double> face_weights);

struct DominanceResult {
  bool ok = true;
  int face = -1;
  int point = -1;
  double alpha_cfl = 0.0;
  double alpha_lf = 0.0;
};

/// alpha_CFL >= alpha_LF at every face Gauss point; returns the worst violation as witness.
DominanceResult check_dominance(const AggregatedAlpha& cfl, const AggregatedAlpha& lf);

}  // namespace mmdg
