#include "mmdg/stability_lab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "mmdg/alpha.hpp"
#include "mmdg/dg_space.hpp"
#include "mmdg/solver.hpp"

namespace mmdg {

LinearAdvection::VelocityField stability_velocity(const std::string& name, int dim, unsigned seed) {
  const double pi = std::numbers::pi;
  const double ay = dim == 2 ? 0.5 : 0.0;
  if (name == "const") return [ay](const Vec2&, double) { return Vec2(1.0, ay); };
  if (name == "varying") {
    return [ay, pi](const Vec2& x, double t) { return Vec2(1.0 + 0.5 * std::sin(2.0 * pi * x.x()) * std::sin(t), ay); };
  }
  if (name == "peaked") {
    return [ay, pi](const Vec2& x, double) { return Vec2(0.1 + 3.0 * std::pow(std::sin(pi * x.x()), 8), ay); };
  }
  if (name == "random") {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> amp(-0.3, 0.3), phase(0.0, 2.0 * pi);
    std::array<double, 6> c{}, ph{}, ps{};
    for (int j = 0; j < 6; ++j) {
      c[j] = amp(gen);
      ph[j] = phase(gen);
      ps[j] = phase(gen);
    }
    return [=](const Vec2& x, double t) {
      Vec2 a(1.0, ay);
      for (int j = 0; j < 3; ++j) {
        a.x() += c[j] * std::sin(2.0 * pi * (j + 1) * x.x() + ph[j]) * std::sin(t + ps[j]);
        if (dim == 2) a.y() += c[j + 3] * std::sin(2.0 * pi * (j + 1) * x.y() + ph[j + 3]) * std::sin(t + ps[j + 3]);
      }
      return a;
    };
  }
  throw std::invalid_argument("unknown velocity field: " + name);
}

StabilityReport stability_lab(const StabilityConfig& cfg) {
  if (cfg.dim != 1 && cfg.dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
  if (cfg.n < 2 || cfg.steps < 1) throw std::invalid_argument("need n >= 2 and steps >= 1");
  const double pi = std::numbers::pi;
  const Box box{Vec2(0.0, 0.0), Vec2(1.0, 1.0)};
  const SimplicialMesh mesh =
      cfg.dim == 1 ? build_structured_mesh(box, {cfg.n, 1}, MeshPattern::interval, {true, false})
                   : build_structured_mesh(box, {cfg.n, cfg.n}, MeshPattern::four_triangles_per_cell, {true, true});
  const DGSpace space(mesh, 0);
  const LinearAdvection model(cfg.dim, stability_velocity(cfg.velocity, cfg.dim, cfg.seed));
  const auto& fw = space.face_quadrature().weights;
  const std::vector<Vec2>& ref = mesh.vertices();
  const double amp = cfg.amplitude / cfg.n;

  auto velocity = [&](double t) {
    std::vector<Vec2> v(ref.size(), Vec2::Zero());
    const double s = amp * cfg.omega * std::cos(cfg.omega * t);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const Vec2& p = ref[i];
      if (cfg.dim == 1) {
        v[i].x() = s * std::sin(2.0 * pi * cfg.mode * p.x());
      } else {
        v[i].x() = s * std::sin(2.0 * pi * p.x()) * std::cos(2.0 * pi * p.y());
        v[i].y() = s * std::cos(2.0 * pi * p.x()) * std::sin(2.0 * pi * p.y());
      }
    }
    return v;
  };

  std::vector<Vec2> x = ref;
  DGField u = l2_project(space, x, 1, [&](const Vec2& p, std::span<double> out) {
    if (cfg.dim == 1) {
      out[0] = std::sin(2.0 * pi * p.x()) + (std::abs(p.x() - 0.5) < 0.2 ? 1.0 : 0.0);
    } else {
      out[0] = std::sin(2.0 * pi * p.x()) * std::sin(2.0 * pi * p.y()) +
               ((p - Vec2(0.5, 0.5)).norm() < 0.2 ? 1.0 : 0.0);
    }
  });

  StabilityReport rep;
  rep.l1.push_back(l1_norm(mesh, x, u));
  rep.mass.push_back(total_mass(mesh, x, u));
  const double l1_0 = rep.l1.front();
  double t = 0.0;
  std::vector<Vec2> x_new(x.size());
  for (int n = 0; n < cfg.steps; ++n) {
    const std::vector<Vec2> v = velocity(t);
    const AlphaTable table = alpha_point_table(space, model, u, x, v, t);
    const AggregatedAlpha a_cfl(cfg.pairing.cfl, table, mesh);
    const AggregatedAlpha a_lf(cfg.pairing.lf, table, mesh);
    const DominanceResult dom = check_dominance(a_cfl, a_lf);
    if (!dom.ok && rep.dominance_ok) {
      rep.dominance_ok = false;
      rep.first_violation = dom;
      rep.violation_step = n;
    }
    const double dt = dt_gauss_weighted(mesh, x, a_cfl, fw).dt;
    for (std::size_t i = 0; i < x.size(); ++i) x_new[i] = x[i] + dt * v[i];
    const MovingMesh mm(mesh, x, x_new, t, t + dt);
    euler_step_p0(space, model, u, mm, a_lf);
    x = x_new;
    t += dt;
    const double l1 = l1_norm(mesh, x, u);
    const double mass = total_mass(mesh, x, u);
    const double inc = (l1 - rep.l1.back()) / l1_0;
    rep.worst_increase = std::max(rep.worst_increase, inc);
    if (inc > 1e-12) rep.monotone = false;
    rep.worst_mass_drift =
        std::max(rep.worst_mass_drift,
                 std::abs(mass - rep.mass.back()) / (rep.mass.back() != 0.0 ? std::abs(rep.mass.back()) : l1_0));
    rep.l1.push_back(l1);
    rep.mass.push_back(mass);
    rep.dt.push_back(dt);
  }
  return rep;
}

}  // namespace mmdg
