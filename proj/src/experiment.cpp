#include "mmdg/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mmdg/burgers_exact.hpp"
#include "mmdg/quadrature.hpp"

namespace mmdg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kProblems{"burgers1d", "sod",      "lax", "burgers2d", "riemann2d", "p0_linear_stability",
                                      "dt_comparison"};

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, const std::set<std::string>& keys, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!keys.count(it.key())) throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
  }
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

State euler_conserved(int dim, std::initializer_list<double> prim) {
  const Euler e(dim);
  State p(dim + 2);
  int i = 0;
  for (double v : prim) p[i++] = v;
  return e.conserved(p);
}

std::string base_problem(const ExperimentConfig& c) { return c.problem == "dt_comparison" ? "burgers1d" : c.problem; }

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  const json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  reject_unknown(j,
                 {"problem", "n", "nx", "ny", "degree", "c_cfl", "preset", "t_end", "outputs", "seed", "adapt",
                  "limiter", "mmpde", "dt_max", "dt_min", "audit", "max_steps", "stability", "allow_unstable"},
                 "config");
  ExperimentConfig c;
  read(j, "problem", c.problem);
  read(j, "n", c.n);
  read(j, "nx", c.nx);
  read(j, "ny", c.ny);
  read(j, "degree", c.degree);
  if (j.contains("c_cfl") && !j["c_cfl"].is_null()) c.c_cfl = j["c_cfl"].get<double>();
  read(j, "preset", c.preset);
  read(j, "allow_unstable", c.allow_unstable);
  if (j.contains("t_end") && !j["t_end"].is_null()) c.t_end = j["t_end"].get<double>();
  read(j, "outputs", c.outputs);
  read(j, "seed", c.seed);
  read(j, "adapt", c.adapt);
  read(j, "dt_max", c.dt_max);
  read(j, "dt_min", c.dt_min);
  read(j, "audit", c.audit);
  read(j, "max_steps", c.max_steps);
  if (j.contains("limiter")) {
    const json& l = j["limiter"];
    reject_unknown(l, {"enabled", "tvb_m", "characteristic"}, "limiter");
    if (l.contains("enabled") && !l["enabled"].is_null()) c.limiter = l["enabled"].get<bool>();
    read(l, "tvb_m", c.tvb_m);
    read(l, "characteristic", c.characteristic);
  }
  if (j.contains("mmpde")) {
    const json& m = j["mmpde"];
    reject_unknown(m, {"tau", "n_sweeps", "theta", "p", "n_smooth", "max_retries", "max_move"}, "mmpde");
    read(m, "tau", c.mmpde.tau);
    read(m, "n_sweeps", c.mmpde.n_sweeps);
    read(m, "theta", c.mmpde.theta);
    read(m, "p", c.mmpde.p);
    read(m, "n_smooth", c.mmpde.n_smooth);
    read(m, "max_retries", c.mmpde.max_retries);
    read(m, "max_move", c.mmpde.max_move);
  }
  if (j.contains("stability")) {
    const json& s = j["stability"];
    reject_unknown(s, {"dim", "n", "velocity", "pairing", "steps", "amplitude", "omega", "mode"}, "stability");
    read(s, "dim", c.stability.dim);
    read(s, "n", c.stability.n);
    read(s, "velocity", c.stability.velocity);
    if (s.contains("pairing")) c.stability.pairing = parse_preset(s["pairing"].get<std::string>());
    read(s, "steps", c.stability.steps);
    read(s, "amplitude", c.stability.amplitude);
    read(s, "omega", c.stability.omega);
    read(s, "mode", c.stability.mode);
  }
  c.stability.seed = c.seed;
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["problem"] = c.problem;
  j["n"] = c.n;
  j["nx"] = c.nx;
  j["ny"] = c.ny;
  j["degree"] = c.degree;
  j["c_cfl"] = c.c_cfl ? json(*c.c_cfl) : json(nullptr);
  j["preset"] = c.preset;
  j["allow_unstable"] = c.allow_unstable;
  j["t_end"] = c.t_end ? json(*c.t_end) : json(nullptr);
  j["outputs"] = c.outputs;
  j["seed"] = c.seed;
  j["adapt"] = c.adapt;
  j["limiter"] = {{"enabled", c.limiter ? json(*c.limiter) : json(nullptr)},
                  {"tvb_m", c.tvb_m},
                  {"characteristic", c.characteristic}};
  j["mmpde"] = {{"tau", c.mmpde.tau},           {"n_sweeps", c.mmpde.n_sweeps},
                {"theta", c.mmpde.theta},       {"p", c.mmpde.p},
                {"n_smooth", c.mmpde.n_smooth}, {"max_retries", c.mmpde.max_retries},
                {"max_move", c.mmpde.max_move}};
  j["dt_max"] = finite_or_null(c.dt_max);
  j["dt_min"] = c.dt_min;
  j["audit"] = c.audit;
  j["max_steps"] = c.max_steps;
  j["stability"] = {{"dim", c.stability.dim},
                    {"n", c.stability.n},
                    {"velocity", c.stability.velocity},
                    {"pairing", preset_name(c.stability.pairing)},
                    {"steps", c.stability.steps},
                    {"amplitude", c.stability.amplitude},
                    {"omega", c.stability.omega},
                    {"mode", c.stability.mode}};
  return j.dump(2);
}

double default_t_end(const std::string& problem) {
  if (problem == "burgers1d" || problem == "dt_comparison") return 1.0;
  if (problem == "sod") return 2.0;
  if (problem == "lax") return 1.3;
  if (problem == "burgers2d") return 2.0;
  if (problem == "riemann2d") return 0.25;
  if (problem == "p0_linear_stability") return 0.0;
  throw std::invalid_argument("unknown problem id: " + problem);
}

ExperimentConfig resolve(const ExperimentConfig& in) {
  if (!kProblems.count(in.problem)) throw std::invalid_argument("unknown problem id: " + in.problem);
  ExperimentConfig c = in;
  const std::string p = base_problem(c);
  if (c.degree < 0 || c.degree > 3) throw std::invalid_argument("degree must be 0..3");
  if (p == "burgers1d" && c.n == 0) c.n = 100;
  if ((p == "sod" || p == "lax") && c.n == 0) c.n = 200;
  if (p == "burgers2d") {
    if (c.nx == 0) c.nx = 30;
    if (c.ny == 0) c.ny = 30;
  }
  if (p == "riemann2d") {
    if (c.nx == 0) c.nx = 50;
    if (c.ny == 0) c.ny = 50;
  }
  if (!c.t_end) c.t_end = default_t_end(c.problem);
  if (!c.c_cfl) c.c_cfl = default_cfl_number(c.degree);
  if (!c.limiter) c.limiter = c.degree >= 1;
  CflConfig pairing;
  pairing.policies = parse_preset(c.preset);
  if (!pairing.dominance_by_construction() && !c.allow_unstable) {
    throw std::invalid_argument("preset '" + c.preset +
                                "' does not guarantee alpha_CFL >= alpha_LF; set allow_unstable to run it");
  }
  if (c.outputs < 1) throw std::invalid_argument("outputs must be >= 1");
  c.stability.seed = c.seed;
  return c;
}

StateFunction initial_condition(const std::string& problem) {
  const double pi = std::numbers::pi;
  if (problem == "burgers1d" || problem == "dt_comparison") {
    return [pi](const Vec2& x, std::span<double> out) { out[0] = 0.5 + std::sin(pi * x.x()); };
  }
  if (problem == "sod" || problem == "lax") {
    const auto [l, r] = tube_states(problem);
    const State sl = euler_conserved(1, {l.rho, l.u, l.p});
    const State sr = euler_conserved(1, {r.rho, r.u, r.p});
    return [sl, sr](const Vec2& x, std::span<double> out) {
      const State& s = x.x() <= 0.0 ? sl : sr;
      for (int c = 0; c < 3; ++c) out[c] = s[c];
    };
  }
  if (problem == "burgers2d") {
    const double c = -std::log(1e-16);
    return [c](const Vec2& x, std::span<double> out) { out[0] = std::exp(-c * (x.x() * x.x() + x.y() * x.y())); };
  }
  if (problem == "riemann2d") {
    const State ne = euler_conserved(2, {1.1, 0.0, 0.0, 1.1});
    const State nw = euler_conserved(2, {0.5065, 0.8939, 0.0, 0.35});
    const State sw = euler_conserved(2, {1.1, 0.8939, 0.8939, 1.1});
    const State se = euler_conserved(2, {0.5065, 0.0, 0.8939, 0.35});
    return [=](const Vec2& x, std::span<double> out) {
      const bool east = x.x() >= 0.5, north = x.y() >= 0.5;
      const State& s = north ? (east ? ne : nw) : (east ? se : sw);
      for (int c = 0; c < 4; ++c) out[c] = s[c];
    };
  }
  throw std::invalid_argument("unknown problem id: " + problem);
}

std::pair<Primitive1D, Primitive1D> tube_states(const std::string& problem) {
  if (problem == "sod") return {{1.0, 0.0, 1.0}, {0.125, 0.0, 0.1}};
  if (problem == "lax") return {{0.445, 0.698, 3.528}, {0.5, 0.0, 0.571}};
  throw std::invalid_argument("not a tube problem: " + problem);
}

ProblemSetup make_problem(const ExperimentConfig& c) {
  ProblemSetup s;
  const std::string p = base_problem(c);
  s.t_end = c.t_end.value_or(default_t_end(c.problem));
  s.initial = initial_condition(p);
  if (p == "burgers1d") {
    s.mesh = std::make_shared<SimplicialMesh>(
        build_structured_mesh({Vec2(0.0, 0.0), Vec2(2.0, 1.0)}, {c.n, 1}, MeshPattern::interval, {true, false}));
    s.model = std::make_shared<Burgers>(1);
  } else if (p == "sod" || p == "lax") {
    s.mesh = std::make_shared<SimplicialMesh>(
        build_structured_mesh({Vec2(-5.0, 0.0), Vec2(5.0, 1.0)}, {c.n, 1}, MeshPattern::interval, {false, false}));
    s.model = std::make_shared<Euler>(1);
    s.metric = MetricSource::density_entropy;
  } else if (p == "burgers2d") {
    s.mesh = std::make_shared<SimplicialMesh>(build_structured_mesh(
        {Vec2(0.0, 0.0), Vec2(2.0, 2.0)}, {c.nx, c.ny}, MeshPattern::four_triangles_per_cell, {true, true}));
    s.model = std::make_shared<Burgers>(2);
  } else if (p == "riemann2d") {
    s.mesh = std::make_shared<SimplicialMesh>(build_structured_mesh(
        {Vec2(0.0, 0.0), Vec2(1.0, 1.0)}, {c.nx, c.ny}, MeshPattern::four_triangles_per_cell, {true, true}));
    s.model = std::make_shared<Euler>(2);
    s.metric = MetricSource::density_entropy;
  } else {
    throw std::invalid_argument("problem has no mesh setup: " + p);
  }
  return s;
}

namespace {

std::vector<double> masses(const SimplicialMesh& mesh, std::span<const Vec2> x, const DGField& u) {
  std::vector<double> m(u.components);
  for (int c = 0; c < u.components; ++c) m[c] = total_mass(mesh, x, u, c);
  return m;
}

class Artifacts {
 public:
  explicit Artifacts(const std::string& dir) : dir_(dir) {
    if (dir_.empty()) return;
    fs::create_directories(fs::path(dir_) / "snapshots");
    open(run_log_, "run_log.csv", "# mmdg run_log v1\nn,t,dt,dt_tilde,L1,mass,min_measure,min_sigma\n");
    open(dt_, "dt.csv", "# mmdg dt v1\nstep,t,dt,argmax_element,dominance_ok,cap_reason\n");
    open(spacing_, "min_spacing.csv", "# mmdg min_spacing v1\nt,min_measure,min_sigma\n");
    open(trajectory_, "mesh_trajectory.txt", "");
  }
  bool enabled() const { return !dir_.empty(); }

  void config(const ExperimentConfig& c) {
    if (!enabled()) return;
    std::ofstream(fs::path(dir_) / "config.json") << config_to_json(c) << '\n';
  }

  void step(const StepRecord& r) {
    if (!enabled()) return;
    run_log_ << r.n << ',' << r.t << ',' << r.dt << ',' << r.dt_tilde << ',' << r.l1 << ',' << r.mass << ','
             << r.min_measure << ',' << r.min_sigma << '\n';
    dt_ << r.n << ',' << r.t << ',' << r.dt << ',' << r.argmax_element << ',' << (r.dominance_ok ? 1 : 0) << ','
        << r.cap_reason << '\n';
    spacing_ << r.t << ',' << r.min_measure << ',' << r.min_sigma << '\n';
  }

  void audit(int n, double c_cfl, const StepAudit& a, const StepRecord& r) {
    if (!enabled()) return;
    if (!audit_.is_open()) open(audit_, "audit.txt", "");
    audit_ << "step " << n << ' ' << c_cfl << ' ' << a.dt_formula << ' ' << r.dt << ' ' << r.cap_reason << ' '
           << a.x_old.size() << ' ' << a.face_alpha_cfl.size() << '\n';
    for (std::size_t i = 0; i < a.x_old.size(); ++i) {
      audit_ << a.x_old[i].x() << ' ' << a.x_old[i].y() << ' ' << a.x_target[i].x() << ' ' << a.x_target[i].y()
             << '\n';
    }
    for (double v : a.face_alpha_cfl) audit_ << v << '\n';
  }

  void snapshot(int index, double t, const SimplicialMesh& mesh, std::span<const Vec2> x, const DGField& u) {
    if (!enabled()) return;
    trajectory_ << "t " << t << '\n';
    write_mesh_snapshot(trajectory_, mesh, x);
    char name[64];
    std::snprintf(name, sizeof name, "field_%04d.txt", index);
    std::ofstream f(fs::path(dir_) / "snapshots" / name);
    f << std::setprecision(17) << "t " << t << '\n';
    write_field_snapshot(f, u);
  }

  void profile(const SimplicialMesh& mesh, std::span<const Vec2> x, const DGField& u, const FluxModel& model) {
    if (!enabled()) return;
    std::ofstream f(fs::path(dir_) / "final_profile.csv");
    f << std::setprecision(17) << "# mmdg profile v1\n";
    const bool euler = dynamic_cast<const Euler*>(&model) != nullptr;
    f << (mesh.dim() == 1 ? "x" : "x,y");
    if (euler) {
      f << (mesh.dim() == 1 ? ",rho,u,p" : ",rho,u,v,p");
    } else {
      f << ",u";
    }
    f << '\n';
    State s(u.components);
    for (int k = 0; k < mesh.num_elements(); ++k) {
      const Vec2 c = element_centroid(mesh, x, k);
      f << c.x();
      if (mesh.dim() == 2) f << ',' << c.y();
      for (int i = 0; i < u.components; ++i) s[i] = u.cell_average(k, i);
      if (euler) s = static_cast<const Euler&>(model).primitive(s);
      for (int i = 0; i < u.components; ++i) f << ',' << s[i];
      f << '\n';
    }
  }

  void report(int code, const std::string& text) {
    if (!enabled()) return;
    std::ofstream(fs::path(dir_) / "report.txt") << "exit_code " << code << '\n' << text << '\n';
  }

 private:
  void open(std::ofstream& f, const char* name, const char* header) {
    f.open(fs::path(dir_) / name);
    f << std::setprecision(17) << header;
  }

  std::string dir_;
  std::ofstream run_log_, dt_, spacing_, trajectory_, audit_;
};

RunResult run_stability(const ExperimentConfig& c, const std::string& dir) {
  RunResult r;
  const StabilityReport rep = stability_lab(c.stability);
  r.stability = rep;
  std::ostringstream os;
  os << "pairing " << preset_name(c.stability.pairing) << ": L1 " << (rep.monotone ? "non-increasing" : "increased")
     << " (worst relative increase " << rep.worst_increase << "), dominance "
     << (rep.dominance_ok ? "satisfied" : "violated");
  r.report = os.str();
  if (!dir.empty()) {
    fs::create_directories(dir);
    std::ofstream(fs::path(dir) / "config.json") << config_to_json(c) << '\n';
    std::ofstream f(fs::path(dir) / "l1.csv");
    f << std::setprecision(17) << "# mmdg stability v1\nstep,dt,l1,mass\n";
    f << 0 << ",0," << rep.l1[0] << ',' << rep.mass[0] << '\n';
    for (std::size_t n = 0; n < rep.dt.size(); ++n) {
      f << n + 1 << ',' << rep.dt[n] << ',' << rep.l1[n + 1] << ',' << rep.mass[n + 1] << '\n';
    }
    std::ofstream(fs::path(dir) / "report.txt") << "exit_code 0\n" << r.report << '\n';
  }
  return r;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const std::string& output_dir) {
  const ExperimentConfig c = resolve(config);
  if (c.problem == "p0_linear_stability") return run_stability(c, output_dir);

  RunResult r;
  const ProblemSetup setup = make_problem(c);
  r.mesh = setup.mesh;
  r.model = setup.model;
  r.space = std::make_shared<DGSpace>(*setup.mesh, c.degree);
  const SimplicialMesh& mesh = *r.mesh;
  const FluxModel& model = *r.model;
  const std::vector<Vec2> x0 = mesh.vertices();
  DGField u0 = l2_project(*r.space, x0, model.components(), setup.initial);

  std::unique_ptr<MeshMotion> motion;
  if (c.adapt) {
    motion = std::make_unique<MmpdeMotion>(mesh, model, setup.metric, c.mmpde, x0);
  } else {
    motion = std::make_unique<StationaryMotion>();
  }
  SolverConfig sc;
  sc.cfl.c_cfl = *c.c_cfl;
  sc.cfl.policies = parse_preset(c.preset);
  sc.cfl.dt_max = c.dt_max;
  sc.limiter.enabled = *c.limiter;
  sc.limiter.tvb_m = c.tvb_m;
  sc.limiter.characteristic = c.characteristic;
  sc.integrator = c.degree == 0 ? Integrator::euler_p0 : Integrator::ssp_rk3;
  sc.dt_min = c.dt_min;
  const bool audit = c.audit || c.problem == "dt_comparison";

  MmdgSolver solver(*r.space, model, sc, *motion, x0, std::move(u0));
  solver.set_audit(audit);
  r.initial_mass = masses(mesh, x0, solver.field());

  Artifacts out(output_dir);
  out.config(c);
  out.snapshot(0, 0.0, mesh, x0, solver.field());
  r.min_measure = validate_mesh(mesh, x0).min_measure;

  const double t_end = setup.t_end;
  int next_output = 1;
  try {
    while (solver.time() < t_end) {
      if (c.max_steps >= 0 && solver.steps() >= c.max_steps) {
        r.report = "stopped after max_steps = " + std::to_string(c.max_steps);
        break;
      }
      const double t_out = next_output >= c.outputs ? t_end : t_end * next_output / c.outputs;
      const StepRecord rec = solver.advance(t_out, t_out == t_end ? "t_end" : "output");
      r.log.push_back(rec);
      r.min_measure = std::min(r.min_measure, rec.min_measure);
      out.step(rec);
      if (audit) {
        r.audits.push_back(solver.last_audit());
        out.audit(rec.n, sc.cfl.c_cfl, solver.last_audit(), rec);
      }
      if (rec.t >= t_out) {
        out.snapshot(next_output, rec.t, mesh, solver.positions(), solver.field());
        ++next_output;
      }
    }
  } catch (const InstabilityError& e) {
    r.exit_code = 2;
    r.report = std::string("instability: ") + e.what();
  } catch (const StateError& e) {
    r.exit_code = 2;
    r.report = std::string("instability: nonphysical state at t = ") + std::to_string(solver.time()) + ": " +
               e.what();
  } catch (const GeometryError& e) {
    r.exit_code = 2;
    r.report = std::string("instability: mesh failure at t = ") + std::to_string(solver.time()) + ": " + e.what();
  }
  r.t_final = solver.time();
  r.u = solver.field();
  r.x = solver.positions();
  r.final_mass = masses(mesh, r.x, r.u);
  r.outflow = solver.boundary_outflow();
  if (r.exit_code == 0 && r.report.empty()) {
    std::ostringstream os;
    os << "completed: t = " << r.t_final << " after " << solver.steps() << " steps";
    r.report = os.str();
  }
  out.profile(mesh, r.x, r.u, model);
  out.report(r.exit_code, r.report);

  if (c.problem == "dt_comparison" && !output_dir.empty()) {
    const DtComparison cmp = compare_dt_policies(r, sc.cfl.c_cfl);
    std::ofstream f(fs::path(output_dir) / "dt_comparison.csv");
    f << std::setprecision(17) << "# mmdg dt_comparison v1\nt,dt_edge,dt_global\n";
    for (std::size_t i = 0; i < cmp.t.size(); ++i) {
      f << cmp.t[i] << ',' << cmp.dt_edge[i] << ',' << cmp.dt_global[i] << '\n';
    }
  }
  return r;
}

std::vector<double> mass_drift(const RunResult& r) {
  std::vector<double> d(r.initial_mass.size());
  for (std::size_t c = 0; c < d.size(); ++c) {
    const double scale = std::abs(r.initial_mass[c]) > 0.0 ? std::abs(r.initial_mass[c]) : 1.0;
    d[c] = std::abs(r.final_mass[c] + r.outflow[c] - r.initial_mass[c]) / scale;
  }
  return d;
}

namespace {

template <typename Exact>
double l1_error_1d(const RunResult& r, int component, Exact exact) {
  const QuadratureRule rule = gauss_legendre_unit(20);
  const ReferenceBasis& basis = r.space->basis();
  std::vector<double> phi(basis.size());
  double err = 0.0;
  for (int k = 0; k < r.mesh->num_elements(); ++k) {
    const auto& el = r.mesh->element(k);
    const double a = r.x[el[0]].x(), b = r.x[el[1]].x();
    for (int q = 0; q < rule.size(); ++q) {
      const double s = rule.points[q].x();
      basis.values(Vec2(s, 0.0), phi);
      double uh = 0.0;
      for (int i = 0; i < basis.size(); ++i) uh += r.u(k, component, i) * phi[i];
      err += (b - a) * rule.weights[q] * std::abs(uh - exact(a + s * (b - a)));
    }
  }
  return err;
}

}  // namespace

double tube_density_l1_error(const RunResult& r, const std::string& problem) {
  const auto [l, rr] = tube_states(problem);
  const ExactRiemann exact(l, rr, 1.4);
  const double t = r.t_final;
  return l1_error_1d(r, 0, [&](double x) { return exact.sample(x, t).rho; });
}

double burgers_l1_error(const RunResult& r) {
  const BurgersCharacteristics exact = BurgersCharacteristics::sine();
  const double t = r.t_final;
  return l1_error_1d(r, 0, [&](double x) { return exact.value(x, t); });
}

DtComparison compare_dt_policies(const RunResult& rec, double c_cfl) {
  DtComparison out;
  const auto& fw = rec.space->face_quadrature().weights;
  double t = 0.0;
  for (std::size_t i = 0; i < rec.audits.size(); ++i) {
    const StepAudit& a = rec.audits[i];
    const AggregatedAlpha e(AlphaPolicy::per_edge, a.alpha, *rec.mesh);
    const AggregatedAlpha h(AlphaPolicy::global, a.alpha, *rec.mesh);
    out.t.push_back(t);
    out.dt_edge.push_back(dt_two_mesh(*rec.mesh, a.x_old, a.x_target, face_alpha_values(e, fw), c_cfl).dt);
    out.dt_global.push_back(dt_two_mesh(*rec.mesh, a.x_old, a.x_target, face_alpha_values(h, fw), c_cfl).dt);
    if (i < rec.log.size()) t = rec.log[i].t;
  }
  return out;
}

VerifyReport verify_run(const std::string& run_dir) {
  VerifyReport rep;
  auto fail = [&](const std::string& m) {
    rep.ok = false;
    rep.messages.push_back(m);
  };
  const ExperimentConfig c = resolve(load_config((fs::path(run_dir) / "config.json").string()));
  if (c.problem == "p0_linear_stability") {
    rep.messages.push_back("stability runs carry their own report; nothing to recompute");
    return rep;
  }
  const ProblemSetup setup = make_problem(c);
  const SimplicialMesh& mesh = *setup.mesh;

  std::ifstream log(fs::path(run_dir) / "run_log.csv");
  if (!log) {
    fail("missing run_log.csv");
    return rep;
  }
  std::string line;
  double first_mass = std::numeric_limits<double>::quiet_NaN();
  double worst_drift = 0.0;
  while (std::getline(log, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
    std::stringstream ss(line);
    std::vector<double> v;
    for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
    if (v.size() != 8) {
      fail("malformed run_log line: " + line);
      continue;
    }
    if (!(v[2] > 0.0)) fail("non-positive dt at step " + std::to_string(static_cast<int>(v[0])));
    if (!(v[6] > 0.0)) fail("non-positive element measure at step " + std::to_string(static_cast<int>(v[0])));
    if (std::isnan(first_mass)) first_mass = v[5];
    worst_drift = std::max(worst_drift, std::abs(v[5] - first_mass) / std::max(std::abs(first_mass), 1e-300));
  }
  const bool periodic = mesh.periodic(0) && (mesh.dim() == 1 || mesh.periodic(1));
  if (periodic && worst_drift > 1e-10) {
    std::ostringstream os;
    os << "mass drift " << worst_drift << " exceeds 1e-10 on a periodic problem";
    fail(os.str());
  }

  std::ifstream audit(fs::path(run_dir) / "audit.txt");
  if (!audit) {
    rep.messages.push_back("no audit.txt; dt recomputation skipped (run with \"audit\": true)");
    return rep;
  }
  std::string tag, cap;
  int n;
  double c_cfl, dt_formula, dt;
  std::size_t nv, nf;
  while (audit >> tag >> n >> c_cfl >> dt_formula >> dt >> cap >> nv >> nf) {
    if (tag != "step" || static_cast<int>(nv) != mesh.num_vertices() || static_cast<int>(nf) != mesh.num_faces()) {
      fail("audit block does not match the mesh");
      break;
    }
    std::vector<Vec2> xo(nv), xt(nv);
    for (std::size_t i = 0; i < nv; ++i) audit >> xo[i].x() >> xo[i].y() >> xt[i].x() >> xt[i].y();
    std::vector<double> fa(nf);
    for (auto& a : fa) audit >> a;
    const double again = dt_two_mesh(mesh, xo, xt, fa, c_cfl).dt;
    if (again != dt_formula) {
      std::ostringstream os;
      os << std::setprecision(17) << "step " << n << ": recomputed dt " << again << " != logged " << dt_formula;
      fail(os.str());
    }
    if (cap == "none" && dt != dt_formula) fail("step " + std::to_string(n) + ": uncapped dt differs from formula");
    if (dt > dt_formula) fail("step " + std::to_string(n) + ": dt exceeds the formula bound");
    ++rep.steps_checked;
  }
  return rep;
}

}  // namespace mmdg
