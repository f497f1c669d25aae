#include <cstdio>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "mmdg/burgers_exact.hpp"
#include "mmdg/experiment.hpp"
#include "mmdg/riemann.hpp"

using namespace mmdg;

namespace {

Primitive1D parse_triple(const std::vector<double>& v) {
  if (v.size() != 3) throw std::invalid_argument("a primitive state needs three values rho u p");
  return {v[0], v[1], v[2]};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-mesh DG solver for hyperbolic conservation laws"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  std::string config_path, out_dir = "run";
  std::optional<std::string> problem, preset;
  std::optional<int> n, nx, ny, degree, outputs;
  std::optional<double> c_cfl, t_end, dt_max;
  std::optional<unsigned> seed;
  std::optional<long> max_steps;
  bool fixed = false, audit = false, no_limiter = false, allow_unstable = false;
  run->add_option("config", config_path, "config file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--problem", problem);
  run->add_option("--n", n, "1D cell count");
  run->add_option("--nx", nx);
  run->add_option("--ny", ny);
  run->add_option("--degree", degree);
  run->add_option("--c-cfl", c_cfl);
  run->add_option("--preset", preset, "policy pair, CFL letter first: ee, he, hh, eh, pe, ...");
  run->add_option("--t-end", t_end);
  run->add_option("--outputs", outputs, "number of equally spaced snapshots");
  run->add_option("--dt-max", dt_max);
  run->add_option("--seed", seed);
  run->add_option("--max-steps", max_steps);
  run->add_flag("--fixed-mesh", fixed, "disable mesh adaptation");
  run->add_flag("--no-limiter", no_limiter);
  run->add_flag("--audit", audit, "write per-step mesh and alpha data for verify");
  run->add_flag("--allow-unstable", allow_unstable, "permit presets without alpha_CFL >= alpha_LF (eh, ...)");

  auto* verify = app.add_subcommand("verify", "recompute dt and invariants from a run directory");
  std::string run_dir;
  verify->add_option("run-dir", run_dir)->required()->check(CLI::ExistingDirectory);

  auto* oracle = app.add_subcommand("oracle", "sample an exact solution");
  oracle->require_subcommand(1);
  auto* riemann = oracle->add_subcommand("riemann", "exact 1D Euler Riemann solution");
  std::string tube = "sod";
  std::vector<double> left, right;
  double t = 2.0, x0 = 0.0, xa = -5.0, xb = 5.0, gamma = 1.4;
  int samples = 201;
  riemann->add_option("--problem", tube, "sod or lax")->capture_default_str();
  riemann->add_option("--left", left, "rho u p")->expected(3);
  riemann->add_option("--right", right, "rho u p")->expected(3);
  riemann->add_option("--gamma", gamma)->capture_default_str();
  riemann->add_option("--t", t)->capture_default_str();
  riemann->add_option("--x0", x0)->capture_default_str();
  riemann->add_option("--xa", xa)->capture_default_str();
  riemann->add_option("--xb", xb)->capture_default_str();
  riemann->add_option("--samples", samples)->capture_default_str();
  auto* burgers = oracle->add_subcommand("burgers",
                                        "characteristic solution of u_t + (u^2/2)_x = 0, u0 = 1/2 + sin(pi x)");
  double bt = 0.15;
  int bsamples = 201;
  burgers->add_option("--t", bt)->capture_default_str();
  burgers->add_option("--samples", bsamples)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      ExperimentConfig c = load_config(config_path);
      if (problem) c.problem = *problem;
      if (n) c.n = *n;
      if (nx) c.nx = *nx;
      if (ny) c.ny = *ny;
      if (degree) c.degree = *degree;
      if (c_cfl) c.c_cfl = *c_cfl;
      if (preset) c.preset = *preset;
      if (t_end) c.t_end = *t_end;
      if (outputs) c.outputs = *outputs;
      if (dt_max) c.dt_max = *dt_max;
      if (seed) c.seed = *seed;
      if (max_steps) c.max_steps = *max_steps;
      if (fixed) c.adapt = false;
      if (no_limiter) c.limiter = false;
      if (audit) c.audit = true;
      if (allow_unstable) c.allow_unstable = true;
      const RunResult r = run_experiment(c, out_dir);
      std::cout << r.report << '\n';
      if (r.stability && !r.stability->dominance_ok) {
        const DominanceResult& d = r.stability->first_violation;
        std::cout << "dominance witness: step " << r.stability->violation_step << " face " << d.face << " point "
                  << d.point << " alpha_cfl " << d.alpha_cfl << " < alpha_lf " << d.alpha_lf << '\n';
      }
      return r.exit_code;
    }
    if (*verify) {
      const VerifyReport rep = verify_run(run_dir);
      for (const auto& m : rep.messages) std::cout << m << '\n';
      std::cout << (rep.ok ? "verified " : "FAILED after ") << rep.steps_checked << " audited steps\n";
      return rep.ok ? 0 : 1;
    }
    if (*riemann) {
      Primitive1D l, r;
      if (!left.empty() || !right.empty()) {
        l = parse_triple(left);
        r = parse_triple(right);
      } else {
        std::tie(l, r) = tube_states(tube);
      }
      const ExactRiemann solver(l, r, gamma);
      std::cout << std::setprecision(12) << "# p* " << solver.p_star() << " u* " << solver.u_star() << '\n'
                << "x,rho,u,p\n";
      for (int i = 0; i < samples; ++i) {
        const double x = xa + (xb - xa) * i / std::max(samples - 1, 1);
        const Primitive1D s = solver.sample(x, t, x0);
        std::cout << x << ',' << s.rho << ',' << s.u << ',' << s.p << '\n';
      }
      return 0;
    }
    if (*burgers) {
      const BurgersCharacteristics exact = BurgersCharacteristics::sine();
      std::cout << std::setprecision(12) << "x,u\n";
      for (int i = 0; i < bsamples; ++i) {
        const double x = 2.0 * i / std::max(bsamples - 1, 1);
        std::cout << x << ',' << exact.value(x, bt) << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
