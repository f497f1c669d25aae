#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mmdg/dg_space.hpp"
#include "support.hpp"

using namespace mmdg;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// average of x^a y^b over the reference triangle: 2 a! b! / (a+b+2)!
double triangle_monomial_average(int a, int b) { return 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2); }

int locate(const SimplicialMesh& mesh, std::span<const Vec2> x, const Vec2& p) {
  int best = 0;
  double best_min = -1e300;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto l = barycentric(mesh, x, k, p);
    double mn = l[0];
    for (int j = 1; j <= mesh.dim(); ++j) mn = std::min(mn, l[j]);
    if (mn > best_min) {
      best_min = mn;
      best = k;
    }
  }
  return best;
}

double l2_error_1d(const DGSpace& space, const DGField& u, std::span<const Vec2> x, double (*f)(double)) {
  const QuadratureRule fine = gauss_legendre_unit(12);
  double e2 = 0.0;
  double v = 0.0;
  for (int k = 0; k < space.mesh().num_elements(); ++k) {
    const double vol = element_measure(space.mesh(), x, k);
    for (int q = 0; q < fine.size(); ++q) {
      evaluate(space, u, k, fine.points[q], {&v, 1});
      const double d = v - f(space.map_to_physical(k, fine.points[q], x).x());
      e2 += vol * fine.weights[q] * d * d;
    }
  }
  return std::sqrt(e2);
}

double sine_data(double x) { return 0.5 + std::sin(std::numbers::pi * x); }

}  // namespace

TEST_CASE("basis sizes and orthonormality") {
  CHECK(ReferenceBasis(1, 0).size() == 1);
  CHECK(ReferenceBasis(1, 3).size() == 4);
  CHECK(ReferenceBasis(2, 2).size() == 6);
  CHECK(ReferenceBasis(2, 3).size() == 10);
  CHECK_THROWS_AS(ReferenceBasis(2, 4), std::invalid_argument);
  for (int d = 1; d <= 2; ++d) {
    for (int k = 0; k <= 3; ++k) {
      const ReferenceBasis b(d, k);
      const QuadratureRule q = element_rule(d, 2 * k + 4);
      std::vector<double> phi(b.size());
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(b.size(), b.size());
      for (int g = 0; g < q.size(); ++g) {
        b.values(q.points[g], phi);
        for (int i = 0; i < b.size(); ++i) {
          for (int j = 0; j < b.size(); ++j) gram(i, j) += q.weights[g] * phi[i] * phi[j];
        }
      }
      CHECK((gram - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(b.value(0, {0.3, 0.2}) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("basis gradients match finite differences") {
  const ReferenceBasis b(2, 3);
  const Vec2 p(0.21, 0.33);
  const double h = 1e-6;
  for (int i = 0; i < b.size(); ++i) {
    const Vec2 g = b.gradient(i, p);
    const double gx = (b.value(i, p + Vec2(h, 0)) - b.value(i, p - Vec2(h, 0))) / (2 * h);
    const double gy = (b.value(i, p + Vec2(0, h)) - b.value(i, p - Vec2(0, h))) / (2 * h);
    CHECK(g.x() == doctest::Approx(gx).epsilon(1e-7));
    CHECK(g.y() == doctest::Approx(gy).epsilon(1e-7));
  }
}

TEST_CASE("quadrature rules") {
  SUBCASE("1D face rule is one vertex") {
    const QuadratureRule f = face_rule(1, 7);
    CHECK(f.size() == 1);
    CHECK(f.weights[0] == 1.0);
  }
  SUBCASE("two-point Gauss rule") {
    const QuadratureRule g = gauss_legendre_unit(2);
    REQUIRE(g.size() == 2);
    CHECK(g.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.weights[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.points[0].x() == doctest::Approx(0.5 - 0.5 / std::sqrt(3.0)).epsilon(1e-15));
    for (int a = 0; a <= 3; ++a) {
      double s = 0.0;
      for (int q = 0; q < 2; ++q) s += g.weights[q] * std::pow(g.points[q].x(), a);
      CHECK(s == doctest::Approx(1.0 / (a + 1)).epsilon(1e-15));
    }
  }
  SUBCASE("triangle rule of degree 4") {
    const QuadratureRule t = element_rule(2, 4);
    double sum = 0.0;
    for (double w : t.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    double s = 0.0;
    for (int q = 0; q < t.size(); ++q) s += t.weights[q] * std::pow(t.points[q].x() * t.points[q].y(), 2);
    CHECK(s == doctest::Approx(1.0 / 90.0).epsilon(1e-14));
  }
  SUBCASE("exactness on all monomials") {
    for (int deg = 0; deg <= 8; ++deg) {
      const QuadratureRule t = element_rule(2, deg);
      CHECK(t.exactness >= deg);
      for (int a = 0; a <= deg; ++a) {
        const int b = deg - a;
        double s = 0.0;
        for (int q = 0; q < t.size(); ++q) s += t.weights[q] * std::pow(t.points[q].x(), a) * std::pow(t.points[q].y(), b);
        CHECK(s == doctest::Approx(triangle_monomial_average(a, b)).epsilon(1e-13));
        CHECK(reference_monomial_average(2, a, b) == doctest::Approx(triangle_monomial_average(a, b)).epsilon(1e-14));
      }
      CHECK(reference_monomial_average(1, deg, 0) == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-15));
    }
  }
}

TEST_CASE("projection of polynomials") {
  const auto mesh = build_structured_mesh({{0, 0}, {1, 1}}, {3, 3}, MeshPattern::four_triangles_per_cell);
  std::mt19937 rng(5);
  const auto x = testing::jitter(mesh, rng, 0.3);
  SUBCASE("constant") {
    const DGSpace space(mesh, 2);
    const DGField u = l2_project(space, x, 2, [](const Vec2&, std::span<double> o) {
      o[0] = 1.0;
      o[1] = -3.0;
    });
    for (int k = 0; k < mesh.num_elements(); ++k) {
      CHECK(u(k, 0, 0) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(u(k, 1, 0) == doctest::Approx(-3.0).epsilon(1e-14));
      for (int i = 1; i < space.basis_size(); ++i) CHECK(std::abs(u(k, 0, i)) < 1e-13);
    }
  }
  SUBCASE("polynomial reproduction") {
    for (int deg = 1; deg <= 3; ++deg) {
      const DGSpace space(mesh, deg);
      auto poly = [deg](const Vec2& p) {
        return 1.0 + 2.0 * p.x() - p.y() + (deg >= 2 ? 0.5 * p.x() * p.y() : 0.0) +
               (deg >= 3 ? p.y() * p.y() * p.y() : 0.0);
      };
      const DGField u = l2_project(space, x, 1, [&](const Vec2& p, std::span<double> o) { o[0] = poly(p); });
      double v = 0.0;
      for (int k = 0; k < mesh.num_elements(); ++k) {
        for (const Vec2& xi : {Vec2(0.1, 0.1), Vec2(0.6, 0.3), Vec2(0.2, 0.7)}) {
          evaluate(space, u, k, xi, {&v, 1});
          CHECK(v == doctest::Approx(poly(space.map_to_physical(k, xi, x))).epsilon(1e-12));
        }
      }
    }
  }
  SUBCASE("residual orthogonal to the space") {
    const DGSpace space(mesh, 2);
    auto f = [](const Vec2& p) { return std::exp(p.x()) * std::cos(2 * p.y()); };
    const DGField u = l2_project(space, x, 1, [&](const Vec2& p, std::span<double> o) { o[0] = f(p); });
    // the projection's own rule (degree 2k + 6) defines the discrete inner product
    const QuadratureRule q = element_rule(2, 2 * space.degree() + 6);
    const ReferenceBasis& basis = space.basis();
    double v = 0.0;
    for (int k = 0; k < mesh.num_elements(); ++k) {
      for (int i = 0; i < space.basis_size(); ++i) {
        double s = 0.0;
        for (int g = 0; g < q.size(); ++g) {
          evaluate(space, u, k, q.points[g], {&v, 1});
          s += q.weights[g] * (f(space.map_to_physical(k, q.points[g], x)) - v) * basis.value(i, q.points[g]);
        }
        CHECK(std::abs(s) < 1e-13);
      }
    }
  }
}

TEST_CASE("projection converges at order k+1") {
  double prev = 0.0;
  for (int n : {25, 50, 100}) {
    const auto mesh = build_structured_mesh({{0, 0}, {2, 0}}, {n, 1}, MeshPattern::interval, {true, false});
    const DGSpace space(mesh, 2);
    const DGField u =
        l2_project(space, mesh.vertices(), 1, [](const Vec2& p, std::span<double> o) { o[0] = sine_data(p.x()); });
    const double e = l2_error_1d(space, u, mesh.vertices(), sine_data);
    if (prev > 0.0) CHECK(std::log2(prev / e) > 2.9);
    prev = e;
  }
}

TEST_CASE("projection is idempotent") {
  const auto mesh = build_structured_mesh({{0, 0}, {1, 1}}, {2, 3}, MeshPattern::four_triangles_per_cell);
  std::mt19937 rng(9);
  const auto x = testing::jitter(mesh, rng, 0.3);
  const DGSpace space(mesh, 3);
  const DGField u = l2_project(space, x, 1, [](const Vec2& p, std::span<double> o) { o[0] = std::sin(5 * p.x() + p.y()); });
  const DGField w = l2_project(space, x, 1, [&](const Vec2& p, std::span<double> o) {
    evaluate_physical(space, u, locate(mesh, x, p), p, x, o);
  });
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) CHECK(w.coeffs[i] == doctest::Approx(u.coeffs[i]).epsilon(1e-12));
}

TEST_CASE("traces") {
  SUBCASE("k = 0 traces are cell averages") {
    const auto mesh = build_structured_mesh({{0, 0}, {1, 1}}, {3, 3}, MeshPattern::four_triangles_per_cell, {true, true});
    const DGSpace space(mesh, 0);
    DGField u = space.make_field(1);
    for (int k = 0; k < mesh.num_elements(); ++k) u(k, 0, 0) = k + 0.5;
    double a = 0.0, b = 0.0;
    for (int f = 0; f < mesh.num_faces(); ++f) {
      for (int g = 0; g < space.face_points(); ++g) {
        evaluate_trace(space, u, f, TraceSide::interior, g, {&a, 1});
        evaluate_trace(space, u, f, TraceSide::exterior, g, {&b, 1});
        CHECK(a == u(mesh.face(f).owner, 0, 0));
        CHECK(b == u(mesh.face(f).neighbor, 0, 0));
      }
    }
  }
  SUBCASE("continuous linear data has matching traces") {
    const auto mesh = build_structured_mesh({{0, 0}, {1, 1}}, {3, 2}, MeshPattern::four_triangles_per_cell);
    const DGSpace space(mesh, 1);
    const DGField u = l2_project(space, mesh.vertices(), 1,
                                 [](const Vec2& p, std::span<double> o) { o[0] = 2.0 - p.x() + 3.0 * p.y(); });
    double a = 0.0, b = 0.0;
    for (int f = 0; f < mesh.num_faces(); ++f) {
      if (mesh.face(f).boundary()) {
        CHECK_THROWS_AS(evaluate_trace(space, u, f, TraceSide::exterior, 0, {&b, 1}), TopologyError);
        continue;
      }
      for (int g = 0; g < space.face_points(); ++g) {
        evaluate_trace(space, u, f, TraceSide::interior, g, {&a, 1});
        evaluate_trace(space, u, f, TraceSide::exterior, g, {&b, 1});
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
        const Vec2 p = space.face_point(f, g, mesh.vertices());
        CHECK(a == doctest::Approx(2.0 - p.x() + 3.0 * p.y()).epsilon(1e-12));
      }
    }
  }
  SUBCASE("step data jumps across the shared face") {
    const auto mesh = mesh_from_connectivity(1, {{-1, 0}, {0, 0}, {1, 0}}, {{{0, 1, -1}, {1, 2, -1}}});
    const DGSpace space(mesh, 1);
    const DGField u =
        l2_project(space, mesh.vertices(), 1, [](const Vec2& p, std::span<double> o) { o[0] = p.x() < 0 ? 1.0 : 3.0; });
    int shared = -1;
    for (int f = 0; f < mesh.num_faces(); ++f) {
      if (!mesh.face(f).boundary()) shared = f;
    }
    REQUIRE(shared >= 0);
    double a = 0.0, b = 0.0;
    evaluate_trace(space, u, shared, TraceSide::interior, 0, {&a, 1});
    evaluate_trace(space, u, shared, TraceSide::exterior, 0, {&b, 1});
    const double left = mesh.face(shared).owner == 0 ? a : b;
    const double right = mesh.face(shared).owner == 0 ? b : a;
    CHECK(left == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(right == doctest::Approx(3.0).epsilon(1e-13));
  }
}

TEST_CASE("mass matrices") {
  SUBCASE("orthonormal convention") {
    const auto mesh = mesh_from_connectivity(2, {{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
    const DGSpace space(mesh, 1);
    const Eigen::MatrixXd m = mass_matrix(space, mesh.vertices(), 0);
    CHECK((m - 0.5 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("scales with the element measure") {
    const auto mesh = mesh_from_connectivity(2, {{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
    const DGSpace space(mesh, 2);
    const std::vector<Vec2> x1 = {{0.1, 0}, {2.1, 0.3}, {0.4, 1.5}};
    const Eigen::MatrixXd m0 = mass_matrix(space, mesh.vertices(), 0);
    const Eigen::MatrixXd m1 = mass_matrix(space, x1, 0);
    const double ratio = element_measure(mesh, x1, 0) / element_measure(mesh, mesh.vertices(), 0);
    CHECK((m1 - ratio * m0).cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("monomial change of basis") {
    for (int d = 1; d <= 2; ++d) {
      const ReferenceBasis b(d, 3);
      const auto& mono = b.monomials();
      const int n = b.size();
      const double vol = 0.37;
      Eigen::MatrixXd mm(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const int a = mono[i][0] + mono[j][0];
          const int c = mono[i][1] + mono[j][1];
          mm(i, j) = vol * (d == 1 ? 1.0 / (a + 1) : triangle_monomial_average(a, c));
        }
      }
      const Eigen::MatrixXd& coef = b.monomial_coefficients();
      const Eigen::MatrixXd phi_mass = coef * mm * coef.transpose();
      CHECK((phi_mass - vol * Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("field snapshot round trip") {
  const auto mesh = build_structured_mesh({{0, 0}, {1, 0}}, {5, 1}, MeshPattern::interval);
  const DGSpace space(mesh, 2);
  const DGField u = l2_project(space, mesh.vertices(), 3, [](const Vec2& p, std::span<double> o) {
    o[0] = std::exp(p.x());
    o[1] = 1.0 / 3.0;
    o[2] = -p.x();
  });
  std::stringstream ss;
  write_field_snapshot(ss, u);
  const DGField v = read_field_snapshot(ss);
  CHECK(v.degree == 2);
  CHECK(v.components == 3);
  CHECK(v.num_elements == 5);
  CHECK(v.coeffs == u.coeffs);
}
