#include "mmdg/cfl.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmdg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DtReport finish(std::vector<double> bounds, double c_cfl) {
  DtReport r;
  double worst = 0.0;
  for (int k = 0; k < static_cast<int>(bounds.size()); ++k) {
    if (bounds[k] > worst) {
      worst = bounds[k];
      r.argmax_element = k;
    }
  }
  r.element_bounds = std::move(bounds);
  if (worst <= 0.0) {
    r.unbounded = true;
    r.dt = kInf;
  } else {
    r.dt = c_cfl / worst;
  }
  return r;
}

std::vector<double> element_sums(const SimplicialMesh& mesh, std::span<const Vec2> x,
                                 std::span<const double> face_alpha) {
  if (static_cast<int>(face_alpha.size()) != mesh.num_faces()) throw std::invalid_argument("alpha/face mismatch");
  std::vector<double> s(mesh.num_elements(), 0.0);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    double acc = 0.0;
    for (int j = 0; j < mesh.faces_per_element(); ++j) {
      const double a = face_alpha[mesh.element_face(k, j)];
      if (a < 0.0) throw std::invalid_argument("negative alpha");
      acc += a * face_measure(mesh, x, k, j);
    }
    s[k] = acc / element_measure(mesh, x, k);
  }
  return s;
}

}  // namespace

PolicyPair parse_preset(const std::string& name) {
  if (name.size() != 2) throw std::invalid_argument("preset must be two letters, e.g. 'he'");
  PolicyPair p;
  p.cfl = parse_alpha_policy(std::string(1, name[0]));
  p.lf = parse_alpha_policy(std::string(1, name[1]));
  return p;
}

std::string preset_name(const PolicyPair& p) {
  auto letter = [](AlphaPolicy a) {
    switch (a) {
      case AlphaPolicy::pointwise:
        return 'p';
      case AlphaPolicy::per_edge:
        return 'e';
      case AlphaPolicy::per_element:
        return 'k';
      case AlphaPolicy::global:
        return 'h';
    }
    return '?';
  };
  return {letter(p.cfl), letter(p.lf)};
}

double default_cfl_number(int degree) {
  switch (degree) {
    case 0:
    case 1:
      return 0.3;
    case 2:
      return 0.15;
    case 3:
      return 0.1;
    default:
      throw std::invalid_argument("unsupported degree");
  }
}

double dt_classic_height(double alpha_h, double sigma_min, double c_cfl) {
  if (!(sigma_min > 0.0)) throw std::invalid_argument("sigma_min must be positive");
  if (alpha_h < 0.0) throw std::invalid_argument("alpha must be non-negative");
  if (alpha_h == 0.0) return kInf;
  return c_cfl * sigma_min / alpha_h;
}

double dt_classic_edge_sum(const SimplicialMesh& mesh, std::span<const Vec2> x, double alpha_h, double c_cfl) {
  if (alpha_h < 0.0) throw std::invalid_argument("alpha must be non-negative");
  if (alpha_h == 0.0) return kInf;
  return c_cfl / (alpha_h * max_edge_sum_ratio(mesh, x));
}

DtReport dt_coupled(const SimplicialMesh& mesh, std::span<const Vec2> x, std::span<const double> face_alpha,
                    double c_cfl) {
  return finish(element_sums(mesh, x, face_alpha), c_cfl);
}

std::vector<double> face_alpha_values(const AggregatedAlpha& alpha, std::span<const double> face_weights) {
  if (static_cast<int>(face_weights.size()) != alpha.points_per_face()) {
    throw std::invalid_argument("face weight count mismatch");
  }
  std::vector<double> out(alpha.num_faces(), 0.0);
  for (int f = 0; f < alpha.num_faces(); ++f) {
    if (alpha.policy() == AlphaPolicy::pointwise) {
      double s = 0.0;
      for (int g = 0; g < alpha.points_per_face(); ++g) s += face_weights[g] * alpha.value(f, g);
      out[f] = s;
    } else {
      out[f] = alpha.value(f, 0);
    }
  }
  return out;
}

DtReport dt_gauss_weighted(const SimplicialMesh& mesh, std::span<const Vec2> x, const AggregatedAlpha& alpha,
                           std::span<const double> face_weights) {
  const auto fa = face_alpha_values(alpha, face_weights);
  return dt_coupled(mesh, x, fa, 1.0);
}

DtReport dt_two_mesh(const SimplicialMesh& mesh, std::span<const Vec2> x_old, std::span<const Vec2> x_new,
                     std::span<const double> face_alpha, double c_cfl) {
  auto s_old = element_sums(mesh, x_old, face_alpha);
  const auto s_new = element_sums(mesh, x_new, face_alpha);
  for (std::size_t k = 0; k < s_old.size(); ++k) s_old[k] = std::max(s_old[k], s_new[k]);
  return finish(std::move(s_old), c_cfl);
}

DominanceResult check_dominance(const AggregatedAlpha& cfl, const AggregatedAlpha& lf) {
  if (cfl.num_faces() != lf.num_faces() || cfl.points_per_face() != lf.points_per_face()) {
    throw std::invalid_argument("alpha tables cover different Gauss points");
  }
  DominanceResult r;
  double worst = 0.0;
  for (int f = 0; f < cfl.num_faces(); ++f) {
    for (int g = 0; g < cfl.points_per_face(); ++g) {
      const double a = cfl.value(f, g);
      const double b = lf.value(f, g);
      if (a < b && b - a > worst) {
        worst = b - a;
        r = DominanceResult{false, f, g, a, b};
      }
    }
  }
  return r;
}

}  // namespace mmdg
