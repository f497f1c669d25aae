#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmdg/experiment.hpp"

using namespace mmdg;
namespace fs = std::filesystem;

namespace {

std::vector<double> at(const std::string& problem, Vec2 p, int m) {
  std::vector<double> out(m);
  initial_condition(problem)(p, out);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mmdg_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("initial data") {
  const double g = 1.4;
  auto sod = at("sod", {-1.0, 0.0}, 3);
  CHECK(sod == std::vector<double>{1.0, 0.0, 1.0 / (g - 1)});
  auto sod_r = at("sod", {1.0, 0.0}, 3);
  CHECK(sod_r[0] == 0.125);
  CHECK(sod_r[2] == doctest::Approx(0.1 / (g - 1)).epsilon(1e-15));
  auto lax = at("lax", {1.0, 0.0}, 3);
  CHECK(lax[0] == 0.5);
  CHECK(lax[1] == 0.0);
  CHECK(lax[2] == doctest::Approx(0.571 / (g - 1)).epsilon(1e-15));
  auto lax_l = at("lax", {-1.0, 0.0}, 3);
  CHECK(lax_l[1] == doctest::Approx(0.445 * 0.698).epsilon(1e-15));
  CHECK(lax_l[2] == doctest::Approx(3.528 / (g - 1) + 0.5 * 0.445 * 0.698 * 0.698).epsilon(1e-15));
  auto q2 = at("riemann2d", {0.25, 0.75}, 4);
  CHECK(q2[0] == 0.5065);
  CHECK(q2[1] == doctest::Approx(0.5065 * 0.8939).epsilon(1e-15));
  CHECK(q2[2] == 0.0);
  CHECK(q2[3] == doctest::Approx(0.35 / (g - 1) + 0.5 * 0.5065 * 0.8939 * 0.8939).epsilon(1e-15));
  auto q1 = at("riemann2d", {0.75, 0.75}, 4);
  CHECK(q1[0] == 1.1);
  CHECK(q1[3] == doctest::Approx(1.1 / (g - 1)).epsilon(1e-15));
  CHECK(at("burgers1d", {0.5, 0.0}, 1)[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(at("burgers1d", {0.0, 0.0}, 1)[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(at("burgers2d", {0.0, 0.0}, 1)[0] == doctest::Approx(1.0).epsilon(1e-15));
  // c = -ln(1e-16): the bump is 1e-16 at unit distance
  CHECK(at("burgers2d", {0.6, 0.8}, 1)[0] == doctest::Approx(1e-16).epsilon(1e-12));
  CHECK_THROWS_AS(initial_condition("nope"), std::invalid_argument);
}

TEST_CASE("config defaults and validation") {
  ExperimentConfig c;
  for (const auto& [p, t] : std::vector<std::pair<std::string, double>>{
           {"burgers1d", 1.0}, {"sod", 2.0}, {"lax", 1.3}, {"burgers2d", 2.0}, {"riemann2d", 0.25}}) {
    c.problem = p;
    CHECK(*resolve(c).t_end == t);
  }
  c.problem = "sod";
  CHECK(resolve(c).n == 200);
  c.problem = "burgers1d";
  CHECK(resolve(c).n == 100);
  for (const auto& [k, cfl] : std::vector<std::pair<int, double>>{{1, 0.3}, {2, 0.15}, {3, 0.1}}) {
    c.degree = k;
    CHECK(*resolve(c).c_cfl == cfl);
  }
  c.degree = 1;
  CHECK(*resolve(c).limiter);
  c.degree = 0;
  CHECK_FALSE(*resolve(c).limiter);

  c.problem = "nope";
  CHECK_THROWS_AS(resolve(c), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"problem": "sod", "bogus": 1})"), std::invalid_argument);
  c.problem = "sod";
  c.preset = "eh";
  CHECK_THROWS_AS(resolve(c), std::invalid_argument);
  c.allow_unstable = true;
  CHECK_NOTHROW(resolve(c));
}

TEST_CASE("config round trip") {
  ExperimentConfig c = parse_config(R"({"problem": "lax", "n": 64, "degree": 2, "preset": "he",
                                        "t_end": 0.4, "seed": 9, "limiter": {"tvb_m": 5.0}, "mmpde": {"tau": 0.02}})");
  CHECK(c.n == 64);
  CHECK(c.degree == 2);
  CHECK(c.tvb_m == 5.0);
  CHECK(c.mmpde.tau == 0.02);
  const std::string j1 = config_to_json(c);
  CHECK(config_to_json(parse_config(j1)) == j1);
}

TEST_CASE("runs are byte-for-byte reproducible") {
  ExperimentConfig c;
  c.problem = "burgers1d";
  c.n = 24;
  c.t_end = 0.2;
  c.outputs = 2;
  const fs::path a = scratch("repro_a"), b = scratch("repro_b");
  REQUIRE(run_experiment(c, a.string()).exit_code == 0);
  REQUIRE(run_experiment(c, b.string()).exit_code == 0);
  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    INFO(rel.string());
    CHECK(slurp(e.path()) == slurp(b / rel));
    ++compared;
  }
  CHECK(compared >= 6);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("offline verification recomputes every dt") {
  ExperimentConfig c;
  c.problem = "burgers1d";
  c.n = 30;
  c.t_end = 0.1;
  c.audit = true;
  const fs::path dir = scratch("verify");
  const RunResult r = run_experiment(c, dir.string());
  REQUIRE(r.exit_code == 0);
  const VerifyReport ok = verify_run(dir.string());
  CHECK(ok.ok);
  CHECK(ok.steps_checked == static_cast<int>(r.log.size()));

  // a logged dt that no longer matches the recorded mesh and alpha
  std::string audit = slurp(dir / "audit.txt");
  std::istringstream first(audit.substr(0, audit.find('\n')));
  std::string tag, n, cfl, dt_formula;
  first >> tag >> n >> cfl >> dt_formula;
  const auto pos = audit.find(dt_formula);
  std::ostringstream bumped;
  bumped.precision(17);
  bumped << std::stod(dt_formula) * 1.01;
  audit.replace(pos, dt_formula.size(), bumped.str());
  std::ofstream(dir / "audit.txt", std::ios::binary) << audit;
  const VerifyReport bad = verify_run(dir.string());
  CHECK_FALSE(bad.ok);
  CHECK_FALSE(bad.messages.empty());
  fs::remove_all(dir);
}

TEST_CASE("stability laboratory examples") {
  StabilityConfig s;
  s.dim = 1;
  s.velocity = "varying";
  s.steps = 500;
  for (const std::string p : {"he", "ee"}) {
    s.pairing = parse_preset(p);
    const StabilityReport r = stability_lab(s);
    CHECK(r.monotone);
    CHECK(r.dominance_ok);
    CHECK(r.l1.size() == 501);
  }
  s.velocity = "peaked";
  s.steps = 50;
  s.pairing = parse_preset("eh");
  const StabilityReport r = stability_lab(s);
  CHECK_FALSE(r.dominance_ok);
  CHECK(r.violation_step >= 0);
  CHECK(r.first_violation.alpha_cfl < r.first_violation.alpha_lf);
}

TEST_CASE("run result bookkeeping") {
  ExperimentConfig c;
  c.problem = "sod";
  c.n = 60;
  c.t_end = 0.2;
  const RunResult r = run_experiment(c);
  REQUIRE(r.exit_code == 0);
  CHECK(r.t_final == 0.2);
  CHECK(r.min_measure > 0.0);
  for (double d : mass_drift(r)) CHECK(d < 1e-12);
  for (const auto& s : r.log) CHECK(s.dt > 0.0);
  CHECK(tube_density_l1_error(r, "sod") < 0.05);
}
