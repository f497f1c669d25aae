#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mmdg/mmpde.hpp"
#include "support.hpp"

using namespace mmdg;

namespace {

MetricField identity_metric(const SimplicialMesh& mesh) { return {mesh.dim(), std::vector<Mat2>(mesh.num_elements(), Mat2::Identity())}; }

MetricField random_metric(const SimplicialMesh& mesh, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.2, 5.0), a(0.0, 3.2);
  MetricField m{mesh.dim(), {}};
  for (int k = 0; k < mesh.num_elements(); ++k) {
    Mat2 r;
    const double t = a(rng);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    Mat2 d = Eigen::Vector2d(u(rng), u(rng)).asDiagonal();
    if (mesh.dim() == 1) {
      m.m.push_back(Mat2::Zero());
      m.m.back()(0, 0) = d(0, 0);
    } else {
      m.m.push_back(r * d * r.transpose());
    }
  }
  return m;
}

}  // namespace

TEST_CASE("energy gradient matches finite differences") {
  std::mt19937 rng(41);
  for (int d = 1; d <= 2; ++d) {
    const auto mesh = d == 1 ? build_structured_mesh({{0, 0}, {1, 0}}, {6, 1}, MeshPattern::interval)
                             : build_structured_mesh({{0, 0}, {1, 1}}, {2, 2}, MeshPattern::four_triangles_per_cell);
    const auto x = testing::jitter(mesh, rng, 0.3);
    const auto xi = testing::jitter(mesh, rng, 0.3);
    const MetricField m = random_metric(mesh, rng);
    const MeshEnergy e(mesh, x, 1.0 / 3.0, 1.5);
    std::vector<Vec2> grad;
    std::vector<double> weight;
    e.gradient(xi, m, grad, weight);
    for (double w : weight) CHECK(w > 0.0);
    const double h = 1e-6;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      for (int c = 0; c < d; ++c) {
        auto p = xi, q = xi;
        p[v][c] += h;
        q[v][c] -= h;
        const double fd = (e.energy(p, m) - e.energy(q, m)) / (2 * h);
        CHECK(grad[v][c] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      }
    }
  }
}

TEST_CASE("identity metric keeps a uniform mesh") {
  const auto m1 = build_structured_mesh({{0, 0}, {1, 0}}, {20, 1}, MeshPattern::interval);
  const auto m2 = build_structured_mesh({{0, 0}, {1, 1}}, {4, 4}, MeshPattern::four_triangles_per_cell, {true, false});
  for (const SimplicialMesh* mesh : {&m1, &m2}) {
    const auto& x = mesh->vertices();
    const auto out = adapt_mesh(*mesh, x, x, identity_metric(*mesh), MmpdeParams{});
    for (int v = 0; v < mesh->num_vertices(); ++v) CHECK((out[v] - x[v]).norm() < 1e-12);
  }
}

TEST_CASE("a concentrated metric pulls vertices toward the layer") {
  const int n = 40;
  const auto mesh = build_structured_mesh({{0, 0}, {1, 0}}, {n, 1}, MeshPattern::interval);
  std::vector<Vec2> x = mesh.vertices();
  MmpdeParams params;
  for (int call = 0; call < 10; ++call) {
    // metric attached to the current physical elements
    MetricField m{1, {}};
    for (int k = 0; k < n; ++k) {
      const double c = element_centroid(mesh, x, k).x();
      Mat2 a = Mat2::Zero();
      a(0, 0) = 1.0 + 400.0 * std::exp(-std::pow((c - 1.0) / 0.08, 2));
      m.m.push_back(a);
    }
    x = adapt_mesh(mesh, mesh.vertices(), x, m, params);
    CHECK(validate_mesh(mesh, x).ok());
  }
  const double last = x[n].x() - x[n - 1].x();
  const double first = x[1].x() - x[0].x();
  CHECK(last < 1.0 / n);
  CHECK(last < 0.5 * first);
  CHECK(x[0].x() == 0.0);
  CHECK(x[n].x() == 1.0);
}

TEST_CASE("constraints and validity with random metrics") {
  std::mt19937 rng(42);
  for (bool periodic : {false, true}) {
    const auto mesh = build_structured_mesh({{0, 0}, {2, 1}}, {6, 4}, MeshPattern::four_triangles_per_cell,
                                            {periodic, periodic});
    const auto& xi_c = mesh.vertices();
    std::vector<Vec2> x = xi_c;
    for (int call = 0; call < 5; ++call) {
      const auto out = adapt_mesh(mesh, xi_c, x, random_metric(mesh, rng), MmpdeParams{}, 0.01);
      CHECK(validate_mesh(mesh, out).min_measure > 0.0);
      for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& c = mesh.constraint(v);
        if (c.fix_x && !periodic) CHECK(out[v].x() == x[v].x());
        if (c.fix_y && !periodic) CHECK(out[v].y() == x[v].y());
        const int g = c.group;
        // periodic copies keep their offset from the class leader
        CHECK((out[v] - out[g]).isApprox(x[v] - x[g], 1e-12));
      }
      x = out;
    }
  }
}

TEST_CASE("element relabeling does not change the result") {
  std::mt19937 rng(43);
  const auto base = build_structured_mesh({{0, 0}, {1, 1}}, {4, 3}, MeshPattern::four_triangles_per_cell);
  const auto a = mesh_from_connectivity(2, base.vertices(), base.elements());
  std::vector<int> perm(a.num_elements());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::array<int, 3>> els(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) els[i] = a.element(perm[i]);
  const auto b = mesh_from_connectivity(2, base.vertices(), els);
  const MetricField ma = random_metric(a, rng);
  MetricField mb{2, std::vector<Mat2>(perm.size())};
  for (std::size_t i = 0; i < perm.size(); ++i) mb.m[i] = ma.m[perm[i]];
  const auto x = testing::jitter(a, rng, 0.2);
  const auto ra = adapt_mesh(a, a.vertices(), x, ma, MmpdeParams{}, 0.02);
  const auto rb = adapt_mesh(b, b.vertices(), x, mb, MmpdeParams{}, 0.02);
  for (int v = 0; v < a.num_vertices(); ++v) CHECK((ra[v] - rb[v]).norm() < 1e-12);
}

TEST_CASE("pseudo-time span controls the displacement") {
  const int n = 30;
  const auto mesh = build_structured_mesh({{0, 0}, {1, 0}}, {n, 1}, MeshPattern::interval);
  MetricField m{1, {}};
  for (int k = 0; k < n; ++k) {
    Mat2 a = Mat2::Zero();
    a(0, 0) = 1.0 + 50.0 * (k > n / 2);
    m.m.push_back(a);
  }
  const auto& x = mesh.vertices();
  auto moved = [&](double dt) {
    const auto out = adapt_mesh(mesh, x, x, m, MmpdeParams{}, dt);
    double s = 0.0;
    for (int v = 0; v <= n; ++v) s = std::max(s, std::abs(out[v].x() - x[v].x()));
    return s;
  };
  const double tiny = moved(1e-5), small = moved(1e-3), full = moved(1.0);
  CHECK(tiny > 0.0);
  CHECK(tiny < small);
  CHECK(small < full);
}

TEST_CASE("invalid input") {
  const auto mesh = build_structured_mesh({{0, 0}, {1, 0}}, {4, 1}, MeshPattern::interval);
  const auto& x = mesh.vertices();
  MetricField bad = identity_metric(mesh);
  bad.m[2](0, 0) = -1.0;
  CHECK_THROWS_AS(adapt_mesh(mesh, x, x, bad, MmpdeParams{}), std::invalid_argument);
  MmpdeParams p;
  p.tau = 0.0;
  CHECK_THROWS_AS(adapt_mesh(mesh, x, x, identity_metric(mesh), p), std::invalid_argument);
}

TEST_CASE("nodal velocity") {
  const std::vector<Vec2> a = {{0.0, 0.0}, {1.0, 2.0}};
  const std::vector<Vec2> b = {{0.01, 0.0}, {1.0, 2.0}};
  const auto v = nodal_velocity(a, b, 0.005);
  CHECK(v[0].x() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(v[1].norm() == 0.0);
  CHECK(nodal_velocity(a, a, 0.1)[0].norm() == 0.0);
  CHECK_THROWS_AS(nodal_velocity(a, b, 0.0), std::invalid_argument);
}

TEST_CASE("piecewise-linear map interpolation") {
  std::mt19937 rng(44);
  const auto mesh = build_structured_mesh({{0, 0}, {1, 1}}, {3, 3}, MeshPattern::four_triangles_per_cell);
  const auto from = testing::jitter(mesh, rng, 0.3);
  // an affine map is reproduced exactly
  std::vector<Vec2> to(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) to[i] = Vec2(2 * from[i].x() - from[i].y() + 1, 0.5 * from[i].y());
  const std::vector<Vec2> pts = {{0.1, 0.2}, {0.5, 0.5}, {0.95, 0.01}, {0.0, 1.0}};
  const auto out = interpolate_map(mesh, from, to, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(out[i].x() == doctest::Approx(2 * pts[i].x() - pts[i].y() + 1).epsilon(1e-13));
    CHECK(out[i].y() == doctest::Approx(0.5 * pts[i].y()).epsilon(1e-13));
  }
  CHECK_THROWS_AS(interpolate_map(mesh, from, to, std::vector<Vec2>{{3.0, 3.0}}), MeshAdaptError);
}
