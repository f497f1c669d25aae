#include "mmdg/limiter.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mmdg {

double minmod(double a, double b, double c) {
  if (a > 0.0 && b > 0.0 && c > 0.0) return std::min({a, b, c});
  if (a < 0.0 && b < 0.0 && c < 0.0) return std::max({a, b, c});
  return 0.0;
}

double minmod_tvb(double a, double b, double c, double m, double h) {
  if (std::abs(a) <= m * h * h) return a;
  return minmod(a, b, c);
}

namespace {

struct Neighbor {
  int element = -1;
  Vec2 shift = Vec2::Zero();  // maps the neighbor's coordinates into this element's frame
};

Neighbor across(const SimplicialMesh& mesh, int k, int j) {
  const Face& fc = mesh.face(mesh.element_face(k, j));
  if (fc.boundary()) return {};
  if (fc.owner == k && fc.owner_local == j) return {fc.neighbor, fc.shift};
  return {fc.owner, -fc.shift};
}

State averages(const DGField& u, int k) {
  State s(u.components);
  for (int c = 0; c < u.components; ++c) s[c] = u.cell_average(k, c);
  return s;
}

State point_value(const DGField& u, int k, std::span<const double> phi) {
  State s = State::Zero(u.components);
  for (int c = 0; c < u.components; ++c) {
    for (int i = 0; i < u.basis_size; ++i) s[c] += u(k, c, i) * phi[i];
  }
  return s;
}

void characteristic_frame(const FluxModel* model, bool charwise, const State& ubar, const Vec2& n, SquareMatrix& l,
                          SquareMatrix& r) {
  const int m = static_cast<int>(ubar.size());
  if (!charwise) {
    l = SquareMatrix::Identity(m, m);
    r = l;
    return;
  }
  model->check_state(ubar);
  model->eigenvectors(ubar, n, l, r);
}

int limit_1d(const DGSpace& space, DGField& u, std::span<const Vec2> x, const LimiterSpec& spec,
             const FluxModel* model, bool charwise) {
  const SimplicialMesh& mesh = space.mesh();
  const ReferenceBasis& basis = space.basis();
  const int nb = u.basis_size;
  const int m = u.components;
  std::vector<double> phi_l(nb), phi_r(nb);
  basis.values(Vec2(0.0, 0.0), phi_l);
  basis.values(Vec2(1.0, 0.0), phi_r);
  const double phi1_r = phi_r[1];
  const DGField src = u;
  int count = 0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const double h = element_measure(mesh, x, k);
    const State ubar = averages(src, k);
    State dp = State::Zero(m), dm = State::Zero(m);
    const Neighbor right = across(mesh, k, 0);
    const Neighbor left = across(mesh, k, 1);
    if (right.element >= 0) {
      const double hr = element_measure(mesh, x, right.element);
      dp = (averages(src, right.element) - ubar) * (h / (0.5 * (h + hr)));
    }
    if (left.element >= 0) {
      const double hl = element_measure(mesh, x, left.element);
      dm = (ubar - averages(src, left.element)) * (h / (0.5 * (h + hl)));
    }
    const State ur = point_value(src, k, phi_r) - ubar;
    const State ul = ubar - point_value(src, k, phi_l);
    State slope(m);
    for (int c = 0; c < m; ++c) slope[c] = src(k, c, 1) * phi1_r;
    SquareMatrix lm, rm;
    characteristic_frame(model, charwise, ubar, Vec2(1.0, 0.0), lm, rm);
    const State a_r = lm * ur, a_l = lm * ul, a_p = lm * dp, a_m = lm * dm, a_s = lm * slope;
    bool limited = false;
    for (int c = 0; c < m && !limited; ++c) {
      limited = minmod_tvb(a_r[c], a_p[c], a_m[c], spec.tvb_m, h) != a_r[c] ||
                minmod_tvb(a_l[c], a_p[c], a_m[c], spec.tvb_m, h) != a_l[c];
    }
    if (!limited) continue;
    ++count;
    State hd(m);
    for (int c = 0; c < m; ++c) hd[c] = minmod_tvb(a_s[c], a_p[c], a_m[c], spec.tvb_m, h);
    const State half = rm * hd;
    for (int c = 0; c < m; ++c) {
      u(k, c, 1) = half[c] / phi1_r;
      for (int i = 2; i < nb; ++i) u(k, c, i) = 0.0;
    }
  }
  return count;
}

int limit_2d(const DGSpace& space, DGField& u, std::span<const Vec2> x, const LimiterSpec& spec,
             const FluxModel* model, bool charwise) {
  const SimplicialMesh& mesh = space.mesh();
  const ReferenceBasis& basis = space.basis();
  const QuadratureRule& rule = space.element_quadrature();
  const int nb = u.basis_size;
  const int m = u.components;
  static const std::array<Vec2, 3> ref_vertex{Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  std::array<Vec2, 3> mid_ref;
  std::array<std::vector<double>, 3> mid_phi;
  for (int j = 0; j < 3; ++j) {
    mid_ref[j] = 0.5 * (ref_vertex[(j + 1) % 3] + ref_vertex[(j + 2) % 3]);
    mid_phi[j].resize(nb);
    basis.values(mid_ref[j], mid_phi[j]);
  }
  const DGField src = u;
  int count = 0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vec2 b0 = element_centroid(mesh, x, k);
    const State ubar = averages(src, k);
    std::array<Neighbor, 3> nbr;
    std::array<Vec2, 3> bc;
    std::array<State, 3> unb;
    double h = 0.0;
    for (int j = 0; j < 3; ++j) {
      nbr[j] = across(mesh, k, j);
      h = std::max(h, face_measure(mesh, x, k, j));
      if (nbr[j].element >= 0) {
        bc[j] = element_centroid(mesh, x, nbr[j].element) + nbr[j].shift;
        unb[j] = averages(src, nbr[j].element);
      }
    }
    // One frame per element, fixed by the averages alone, so a second pass sees the same variables.
    Vec2 dir(1.0, 0.0);
    if (charwise) {
      const Vec2 mom(ubar[1], ubar[2]);
      if (mom.norm() > 1e-12 * std::abs(ubar[0])) dir = mom.normalized();
    }
    SquareMatrix lm, rm;
    characteristic_frame(model, charwise, ubar, dir, lm, rm);
    std::array<State, 3> delta;
    bool limited = false;
    for (int i = 0; i < 3; ++i) {
      const Vec2 mi = space.map_to_physical(k, mid_ref[i], x);
      const Vec2 r = mi - b0;
      State du = State::Zero(m);
      bool found = false;
      const std::array<std::array<int, 2>, 3> pairs{{{i, (i + 1) % 3}, {i, (i + 2) % 3}, {(i + 1) % 3, (i + 2) % 3}}};
      for (const auto& pr : pairs) {
        if (nbr[pr[0]].element < 0 || nbr[pr[1]].element < 0) continue;
        Mat2 a;
        a.col(0) = bc[pr[0]] - b0;
        a.col(1) = bc[pr[1]] - b0;
        const double det = a.determinant();
        if (std::abs(det) <= 1e-14 * a.squaredNorm()) continue;
        const Vec2 coef = a.inverse() * r;
        if (coef.x() < -1e-12 || coef.y() < -1e-12) continue;
        du = coef.x() * (unb[pr[0]] - ubar) + coef.y() * (unb[pr[1]] - ubar);
        found = true;
        break;
      }
      if (!found && nbr[i].element >= 0) {
        const Vec2 d = bc[i] - b0;
        du = (unb[i] - ubar) * (r.dot(d) / d.squaredNorm());
      }
      const State ut = point_value(src, k, mid_phi[i]) - ubar;
      const State a_t = lm * ut, a_d = spec.nu * (lm * du);
      delta[i].resize(m);
      for (int c = 0; c < m; ++c) {
        delta[i][c] = minmod_tvb(a_t[c], a_d[c], a_d[c], spec.tvb_m, h);
        limited = limited || delta[i][c] != a_t[c];
      }
    }
    if (!limited) continue;
    ++count;
    // balance each field so the deviations sum to zero, then map back
    std::array<State, 3> dh;
    for (int i = 0; i < 3; ++i) dh[i] = State::Zero(m);
    for (int c = 0; c < m; ++c) {
      double pos = 0.0, neg = 0.0;
      for (int i = 0; i < 3; ++i) {
        pos += std::max(0.0, delta[i][c]);
        neg += std::max(0.0, -delta[i][c]);
      }
      if (pos > 0.0 && neg > 0.0) {
        const double tp = std::min(1.0, neg / pos), tn = std::min(1.0, pos / neg);
        for (int i = 0; i < 3; ++i) dh[i][c] = tp * std::max(0.0, delta[i][c]) - tn * std::max(0.0, -delta[i][c]);
      }
    }
    for (int i = 0; i < 3; ++i) dh[i] = rm * dh[i];
    for (int c = 0; c < m; ++c) {
      // Linear function with midpoint deviations dh (Crouzeix-Raviart form), projected on the P1 modes.
      for (int mode = 1; mode < nb; ++mode) u(k, c, mode) = 0.0;
      for (int q = 0; q < rule.size(); ++q) {
        const Vec2& p = rule.points[q];
        const std::array<double, 3> lam{1.0 - p.x() - p.y(), p.x(), p.y()};
        double f = 0.0;
        for (int i = 0; i < 3; ++i) f += dh[i][c] * (1.0 - 2.0 * lam[i]);
        for (int mode = 1; mode <= 2; ++mode) u(k, c, mode) += rule.weights[q] * space.elem_phi(q, mode) * f;
      }
    }
  }
  return count;
}

}  // namespace

int apply_limiter(const DGSpace& space, DGField& u, std::span<const Vec2> x, const LimiterSpec& spec,
                  const FluxModel* model) {
  if (!spec.enabled || space.degree() == 0) return 0;
  const bool charwise = spec.characteristic && model != nullptr && u.components > 1;
  if (space.mesh().dim() == 1) return limit_1d(space, u, x, spec, model, charwise);
  return limit_2d(space, u, x, spec, model, charwise);
}

}  // namespace mmdg
