#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "mmdg/alpha.hpp"
#include "mmdg/flux.hpp"

using namespace mmdg;

namespace {

State s1(double a) {
  State u(1);
  u << a;
  return u;
}

State s3(double a, double b, double c) {
  State u(3);
  u << a, b, c;
  return u;
}

// hand-written 1D Euler flux from conserved variables
Eigen::Vector3d euler1d_flux(const Eigen::Vector3d& u, double gamma) {
  const double rho = u[0], m = u[1], e = u[2];
  const double v = m / rho;
  const double p = (gamma - 1) * (e - 0.5 * rho * v * v);
  return {m, m * v + p, v * (e + p)};
}

// central-difference Jacobian of (F - U xdot) n
Eigen::MatrixXd fd_jacobian(const FluxModel& model, const State& u, const Vec2& n, const Vec2& xdot) {
  const int m = model.components();
  auto g = [&](const State& w) -> State { return modified_flux(model, w, Vec2::Zero(), 0.0, xdot) * n; };
  Eigen::MatrixXd jac(m, m);
  for (int j = 0; j < m; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(u[j]));
    State up = u, dn = u;
    up[j] += h;
    dn[j] -= h;
    jac.col(j) = (g(up) - g(dn)) / (2 * h);
  }
  return jac;
}

double fd_spectral_radius(const FluxModel& model, const State& u, const Vec2& n, const Vec2& xdot) {
  return fd_jacobian(model, u, n, xdot).eigenvalues().cwiseAbs().maxCoeff();
}

State random_euler(std::mt19937& rng, const Euler& e) {
  std::uniform_real_distribution<double> pos(0.1, 3.0), vel(-2.0, 2.0);
  State w(e.components());
  w[0] = pos(rng);
  for (int i = 1; i <= e.dim(); ++i) w[i] = vel(rng);
  w[e.dim() + 1] = pos(rng);
  return e.conserved(w);
}

}  // namespace

TEST_CASE("pointwise alpha examples") {
  const LinearAdvection adv(1, [](const Vec2&, double) { return Vec2(1.0, 0.0); });
  EdgeTracePoint p{s1(0.3), s1(0.8), Vec2::Zero(), Vec2(1, 0), Vec2::Zero()};
  CHECK(alpha_pointwise(adv, p, 0.0) == 1.0);

  const Burgers burgers(1);
  for (double nx : {1.0, -1.0}) {
    EdgeTracePoint q{s1(0.5), s1(0.5), Vec2::Zero(), Vec2(nx, 0), Vec2(0.5, 0)};
    CHECK(alpha_pointwise(burgers, q, 0.0) == 0.0);
  }

  const Euler euler(1);
  const State sod_left = euler.conserved(s3(1.0, 0.0, 1.0));
  EdgeTracePoint r{sod_left, sod_left, Vec2::Zero(), Vec2(1, 0), Vec2::Zero()};
  CHECK(alpha_pointwise(euler, r, 0.0) == doctest::Approx(std::sqrt(1.4)).epsilon(1e-15));
  CHECK(std::sqrt(1.4) == doctest::Approx(1.18322).epsilon(1e-5));

  EdgeTracePoint bad{s3(-1.0, 0.0, 1.0), sod_left, Vec2::Zero(), Vec2(1, 0), Vec2::Zero()};
  CHECK_THROWS_AS(alpha_pointwise(euler, bad, 0.0), StateError);
}

TEST_CASE("Lagrangian limit for scalar laws") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Burgers b2(2);
  const LinearAdvection adv(2, [](const Vec2& x, double t) { return Vec2(std::sin(x.x() + t), x.y()); });
  for (int i = 0; i < 50; ++i) {
    const double v = u(rng);
    const Vec2 n = Vec2(u(rng), u(rng)).normalized();
    CHECK(b2.max_abs_eig(s1(v), Vec2::Zero(), 0.0, n, Vec2(v, v)) == doctest::Approx(0.0));
    const Vec2 x(u(rng), u(rng));
    CHECK(std::abs(adv.max_abs_eig(s1(v), x, 0.3, n, adv.velocity(x, 0.3))) < 1e-15);
    CHECK(adv.max_abs_eig(s1(v), x, 0.3, n, Vec2::Zero()) >= 0.0);
  }
}

TEST_CASE("modified flux") {
  const LinearAdvection adv(2, [](const Vec2&, double) { return Vec2(0.4, -1.2); });
  const FluxMatrix h = modified_flux(adv, s1(2.0), Vec2::Zero(), 0.0, Vec2(0.4, -1.2));
  CHECK(h.cwiseAbs().maxCoeff() == 0.0);
  const FluxMatrix f = modified_flux(adv, s1(2.0), Vec2::Zero(), 0.0, Vec2::Zero());
  CHECK(f(0, 0) == doctest::Approx(0.8));
  CHECK(f(0, 1) == doctest::Approx(-2.4));

  const Euler euler(1);
  const State u = euler.conserved(s3(1.0, 0.0, 1.0));
  const Eigen::Vector3d ref = euler1d_flux(Eigen::Vector3d(u[0], u[1], u[2]), 1.4) - 0.1 * Eigen::Vector3d(u[0], u[1], u[2]);
  const FluxMatrix he = modified_flux(euler, u, Vec2::Zero(), 0.0, Vec2(0.1, 0.0));
  for (int c = 0; c < 3; ++c) CHECK(he(c, 0) == doctest::Approx(ref[c]).epsilon(1e-15));
  CHECK(he(0, 0) == doctest::Approx(-0.1));
  CHECK(he(1, 0) == doctest::Approx(1.0));
  CHECK(he(2, 0) == doctest::Approx(-0.25));
}

TEST_CASE("Lax-Friedrichs flux") {
  const Euler euler(2);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const State a = random_euler(rng, euler), b = random_euler(rng, euler);
    const Vec2 n = Vec2(u(rng), u(rng)).normalized();
    const Vec2 xd(u(rng), u(rng));
    const double alpha = 5.0 * (u(rng) + 1.0);
    const State consistent = lf_flux(euler, a, a, Vec2::Zero(), 0.0, n, xd, alpha);
    const State exact = modified_flux(euler, a, Vec2::Zero(), 0.0, xd) * n;
    CHECK((consistent - exact).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + exact.cwiseAbs().maxCoeff()));
    const State fwd = lf_flux(euler, a, b, Vec2::Zero(), 0.0, n, xd, alpha);
    const State back = lf_flux(euler, b, a, Vec2::Zero(), 0.0, -n, xd, alpha);
    CHECK((fwd + back).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + fwd.cwiseAbs().maxCoeff()));
  }

  // upwinding for linear advection: (alpha + lambda)/2 U_int - (alpha - lambda)/2 U_ext
  for (double lambda : {0.7, -0.7}) {
    const LinearAdvection adv(1, [lambda](const Vec2&, double) { return Vec2(lambda, 0.0); });
    const State f = lf_flux(adv, s1(2.0), s1(5.0), Vec2::Zero(), 0.0, Vec2(1, 0), Vec2::Zero(), std::abs(lambda));
    CHECK(f[0] == doctest::Approx(lambda * (lambda > 0 ? 2.0 : 5.0)).epsilon(1e-15));
  }
}

TEST_CASE("Euler spectral radius matches a finite-difference Jacobian") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int dim = 1; dim <= 2; ++dim) {
    const Euler euler(dim);
    for (int i = 0; i < 200; ++i) {
      const State w = random_euler(rng, euler);
      const Vec2 n = dim == 1 ? Vec2(u(rng) < 0 ? -1.0 : 1.0, 0.0) : Vec2(u(rng), u(rng)).normalized();
      const Vec2 xd = dim == 1 ? Vec2(u(rng), 0.0) : Vec2(u(rng), u(rng));
      const double analytic = euler.max_abs_eig(w, Vec2::Zero(), 0.0, n, xd);
      const double fd = fd_spectral_radius(euler, w, n, xd);
      CHECK(std::abs(analytic - fd) <= 1e-8 * std::max(1.0, analytic));
    }
  }
}

TEST_CASE("2D Euler rotational consistency") {
  const Euler e2(2);
  const Euler e1(1);
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const State w = random_euler(rng, e2);
    const Vec2 n = Vec2(u(rng), u(rng)).normalized();
    const Vec2 tan(-n.y(), n.x());
    // rotate momentum into the (n, t) frame
    State r(4);
    r << w[0], w[1] * n.x() + w[2] * n.y(), w[1] * tan.x() + w[2] * tan.y(), w[3];
    const State fn = e2.flux(w, Vec2::Zero(), 0.0) * n;
    const State fr = e2.flux(r, Vec2::Zero(), 0.0).col(0);
    // rotate back
    State back(4);
    back << fr[0], fr[1] * n.x() + fr[2] * tan.x(), fr[1] * n.y() + fr[2] * tan.y(), fr[3];
    CHECK((fn - back).cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + fn.cwiseAbs().maxCoeff()));
    // the normal part is the 1D flux of (rho, m.n, E + tangential kinetic energy removed)
    const double vt = r[2] / r[0];
    const State f1 = e1.flux(s3(r[0], r[1], r[3] - 0.5 * r[0] * vt * vt), Vec2::Zero(), 0.0).col(0);
    CHECK(fr[0] == doctest::Approx(f1[0]).epsilon(1e-13));
    CHECK(fr[1] == doctest::Approx(f1[1]).epsilon(1e-13));
    CHECK(fr[3] == doctest::Approx(f1[2] + 0.5 * vt * vt * r[1]).epsilon(1e-12));
  }
}

TEST_CASE("Euler eigenvectors diagonalize the normal Jacobian") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int dim = 1; dim <= 2; ++dim) {
    const Euler euler(dim);
    for (int i = 0; i < 20; ++i) {
      const State w = random_euler(rng, euler);
      const Vec2 n = dim == 1 ? Vec2(1.0, 0.0) : Vec2(u(rng), u(rng)).normalized();
      SquareMatrix left, right;
      euler.eigenvectors(w, n, left, right);
      const int m = euler.components();
      CHECK((left * right - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-10);
      Eigen::MatrixXd lam = left * fd_jacobian(euler, w, n, Vec2::Zero()) * right;
      const double scale = lam.cwiseAbs().maxCoeff();
      lam.diagonal().setZero();
      CHECK(lam.cwiseAbs().maxCoeff() < 1e-7 * scale);
    }
  }
}

TEST_CASE("state checks and primitive round trip") {
  const Euler e(2);
  State p(4);
  p << 1.2, 0.3, -0.4, 2.0;
  const State c = e.conserved(p);
  CHECK((e.primitive(c) - p).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(e.pressure(c) == doctest::Approx(2.0));
  CHECK(e.sound_speed(c) == doctest::Approx(std::sqrt(1.4 * 2.0 / 1.2)));
  State neg = c;
  neg[3] = 0.0;
  CHECK_THROWS_AS(e.check_state(neg), StateError);
}

TEST_CASE("alpha aggregation against brute force") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (bool periodic : {false, true}) {
    const auto mesh = build_structured_mesh({{0, 0}, {1, 1}}, {3, 4}, MeshPattern::four_triangles_per_cell,
                                            {periodic, periodic});
    const int gp = 3;
    AlphaTable table{mesh.num_faces(), gp, std::vector<double>(mesh.num_faces() * gp)};
    for (double& v : table.values) v = u(rng);

    {
      AlphaTable flat = table;
      std::fill(flat.values.begin(), flat.values.end(), 0.42);
      for (AlphaPolicy pol : {AlphaPolicy::pointwise, AlphaPolicy::per_edge, AlphaPolicy::per_element, AlphaPolicy::global}) {
        const AggregatedAlpha a = alpha_aggregate(pol, flat, mesh);
        for (int f = 0; f < mesh.num_faces(); ++f) {
          for (int g = 0; g < gp; ++g) CHECK(a.value(f, g) == 0.42);
        }
      }
    }

    const AggregatedAlpha pw = alpha_aggregate(AlphaPolicy::pointwise, table, mesh);
    const AggregatedAlpha ed = alpha_aggregate(AlphaPolicy::per_edge, table, mesh);
    const AggregatedAlpha el = alpha_aggregate(AlphaPolicy::per_element, table, mesh);
    const AggregatedAlpha gl = alpha_aggregate(AlphaPolicy::global, table, mesh);
    const double all = *std::max_element(table.values.begin(), table.values.end());
    auto face_max = [&](int f) {
      double m = 0.0;
      for (int g = 0; g < gp; ++g) m = std::max(m, table(f, g));
      return m;
    };
    auto element_max = [&](int k) {
      double m = 0.0;
      for (int j = 0; j < 3; ++j) m = std::max(m, face_max(mesh.element_face(k, j)));
      return m;
    };
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const Face& face = mesh.face(f);
      double scope = element_max(face.owner);
      if (!face.boundary()) scope = std::max(scope, element_max(face.neighbor));
      for (int g = 0; g < gp; ++g) {
        CHECK(pw.value(f, g) == table(f, g));
        CHECK(ed.value(f, g) == face_max(f));
        CHECK(el.value(f, g) == scope);
        CHECK(gl.value(f, g) == all);
        CHECK(pw.value(f, g) <= ed.value(f, g));
        CHECK(ed.value(f, g) <= el.value(f, g));
        CHECK(el.value(f, g) <= gl.value(f, g));
      }
    }
    for (int k = 0; k < mesh.num_elements(); ++k) CHECK(gl.element_max(k) == element_max(k));
    CHECK(gl.global_max() == all);
  }
}

TEST_CASE("per-edge alpha of a two-point edge") {
  {
    const auto mesh = build_structured_mesh({{0, 0}, {1, 1}}, {1, 1}, MeshPattern::four_triangles_per_cell);
    AlphaTable t{mesh.num_faces(), 2, std::vector<double>(mesh.num_faces() * 2, 0.0)};
    t(0, 0) = 0.2;
    t(0, 1) = 0.7;
    CHECK(alpha_aggregate(AlphaPolicy::per_edge, t, mesh).value(0, 0) == 0.7);
  }
}
