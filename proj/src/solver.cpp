#include "mmdg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mmdg {

void residual(const DGSpace& space, const FluxModel& model, const DGField& u, std::span<const Vec2> x,
              std::span<const Vec2> velocity, double t, const AggregatedAlpha& alpha_lf, DGField& out,
              std::vector<double>* boundary_flux) {
  const SimplicialMesh& mesh = space.mesh();
  const int d = mesh.dim();
  const int m = u.components;
  const int nb = u.basis_size;
  const bool moving = !velocity.empty();
  if (out.coeffs.size() != u.coeffs.size()) out = space.make_field(m);
  std::fill(out.coeffs.begin(), out.coeffs.end(), 0.0);
  if (boundary_flux) boundary_flux->assign(m, 0.0);

  const QuadratureRule& erule = space.element_quadrature();
  std::vector<Vec2> grad(nb);
  State uq(m);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const AffineMap am = affine_map(mesh, x, k);
    const double measure = element_measure(mesh, x, k);
    const Mat2 inv_t = am.inverse.transpose();
    for (int q = 0; q < erule.size(); ++q) {
      for (int c = 0; c < m; ++c) {
        double s = 0.0;
        for (int i = 0; i < nb; ++i) s += u(k, c, i) * space.elem_phi(q, i);
        uq[c] = s;
      }
      const Vec2& xi = space.elem_point(q);
      const Vec2 xq = space.map_to_physical(k, xi, x);
      const Vec2 xdot = moving ? space.element_interpolate(k, xi, velocity) : Vec2::Zero();
      const FluxMatrix h = modified_flux(model, uq, xq, t, xdot);
      const double wk = measure * erule.weights[q];
      for (int i = 1; i < nb; ++i) {
        Vec2 g = inv_t * space.elem_grad_ref(q, i);
        if (d == 1) g.y() = 0.0;
        for (int c = 0; c < m; ++c) {
          out(k, c, i) += wk * (h(c, 0) * g.x() + (d == 2 ? h(c, 1) * g.y() : 0.0));
        }
      }
    }
  }

  const QuadratureRule& frule = space.face_quadrature();
  State ui(m), ue(m);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    const Vec2 n = outward_normal(mesh, x, fc.owner, fc.owner_local);
    const double len = face_measure(mesh, x, fc.owner, fc.owner_local);
    for (int g = 0; g < frule.size(); ++g) {
      for (int c = 0; c < m; ++c) {
        double s = 0.0;
        for (int i = 0; i < nb; ++i) s += u(fc.owner, c, i) * space.face_phi(f, TraceSide::interior, g, i);
        ui[c] = s;
      }
      if (fc.boundary()) {
        ue = ui;
      } else {
        for (int c = 0; c < m; ++c) {
          double s = 0.0;
          for (int i = 0; i < nb; ++i) s += u(fc.neighbor, c, i) * space.face_phi(f, TraceSide::exterior, g, i);
          ue[c] = s;
        }
      }
      const Vec2 xq = space.face_point(f, g, x);
      const Vec2 xdot = moving ? space.face_interpolate(f, g, velocity) : Vec2::Zero();
      const State fhat = lf_flux(model, ui, ue, xq, t, n, xdot, alpha_lf.value(f, g));
      const double w = len * frule.weights[g];
      for (int i = 0; i < nb; ++i) {
        const double po = w * space.face_phi(f, TraceSide::interior, g, i);
        for (int c = 0; c < m; ++c) out(fc.owner, c, i) -= po * fhat[c];
      }
      if (fc.boundary()) {
        if (boundary_flux) {
          for (int c = 0; c < m; ++c) (*boundary_flux)[c] += w * fhat[c];
        }
      } else {
        for (int i = 0; i < nb; ++i) {
          const double pn = w * space.face_phi(f, TraceSide::exterior, g, i);
          for (int c = 0; c < m; ++c) out(fc.neighbor, c, i) += pn * fhat[c];
        }
      }
    }
  }
}

void check_cell_averages(const FluxModel& model, const DGField& u) {
  State s(u.components);
  for (int k = 0; k < u.num_elements; ++k) {
    for (int c = 0; c < u.components; ++c) s[c] = u.cell_average(k, c);
    for (int c = 0; c < u.components; ++c) {
      if (!std::isfinite(s[c])) throw StateError("non-finite cell average in element " + std::to_string(k));
    }
    model.check_state(s);
  }
}

namespace {

std::vector<double> measures(const SimplicialMesh& mesh, std::span<const Vec2> x) {
  std::vector<double> out(mesh.num_elements());
  for (int k = 0; k < mesh.num_elements(); ++k) out[k] = element_measure(mesh, x, k);
  return out;
}

void post_stage(const DGSpace& space, DGField& u, std::span<const Vec2> x, const StagePost& post) {
  if (post.limiter) apply_limiter(space, u, x, *post.limiter, post.model);
  if (post.check_states && post.model) check_cell_averages(*post.model, u);
}

// u <- (a |K_a| u_a + b (|K_b| u_b + dt L)) / |K_new|, element by element.
void combine(DGField& out, double a, const DGField& ua, const std::vector<double>& ka, double b, const DGField& ub,
             const std::vector<double>& kb, double dt, const DGField& l, const std::vector<double>& knew) {
  const int per = out.components * out.basis_size;
  for (int k = 0; k < out.num_elements; ++k) {
    for (int j = 0; j < per; ++j) {
      const std::size_t idx = static_cast<std::size_t>(k) * per + j;
      const double w = a * ka[k] * ua.coeffs[idx] + b * (kb[k] * ub.coeffs[idx] + dt * l.coeffs[idx]);
      out.coeffs[idx] = w / knew[k];
    }
  }
}

}  // namespace

std::vector<double> euler_step(const DGSpace& space, const FluxModel& model, DGField& u, const MovingMesh& mm,
                               const AggregatedAlpha& alpha_lf, const StagePost& post) {
  const double dt = mm.dt();
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const auto& mesh = space.mesh();
  const auto k0 = measures(mesh, mm.x_old());
  const auto k1 = measures(mesh, mm.x_new());
  DGField l;
  std::vector<double> bflux;
  residual(space, model, u, mm.x_old(), mm.nodal_velocity(), mm.t_n(), alpha_lf, l, &bflux);
  DGField next = u;
  combine(next, 0.0, u, k0, 1.0, u, k0, dt, l, k1);
  post_stage(space, next, mm.x_new(), post);
  u = std::move(next);
  for (double& b : bflux) b *= dt;
  return bflux;
}

std::vector<double> euler_step_p0(const DGSpace& space, const FluxModel& model, DGField& u, const MovingMesh& mm,
                                  const AggregatedAlpha& alpha_lf) {
  if (space.degree() != 0) throw std::invalid_argument("euler_step_p0 requires k = 0");
  return euler_step(space, model, u, mm, alpha_lf, StagePost{nullptr, nullptr, false});
}

std::vector<double> ssp_rk3_step(const DGSpace& space, const FluxModel& model, DGField& u, const MovingMesh& mm,
                                 const AggregatedAlpha& alpha_lf, const StagePost& post) {
  const double dt = mm.dt();
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const auto& mesh = space.mesh();
  const double t0 = mm.t_n(), t1 = mm.t_next(), th = 0.5 * (t0 + t1);
  const std::vector<Vec2> xh = mm.positions_at(th);
  const auto k0 = measures(mesh, mm.x_old());
  const auto k1 = measures(mesh, mm.x_new());
  const auto kh = measures(mesh, xh);
  const auto& v = mm.nodal_velocity();

  DGField l;
  std::vector<double> b0, b1, b2;
  residual(space, model, u, mm.x_old(), v, t0, alpha_lf, l, &b0);
  DGField u1 = u;
  combine(u1, 0.0, u, k0, 1.0, u, k0, dt, l, k1);
  post_stage(space, u1, mm.x_new(), post);

  residual(space, model, u1, mm.x_new(), v, t1, alpha_lf, l, &b1);
  DGField u2 = u;
  combine(u2, 0.75, u, k0, 0.25, u1, k1, dt, l, kh);
  post_stage(space, u2, xh, post);

  residual(space, model, u2, xh, v, th, alpha_lf, l, &b2);
  DGField u3 = u;
  combine(u3, 1.0 / 3.0, u, k0, 2.0 / 3.0, u2, kh, dt, l, k1);
  post_stage(space, u3, mm.x_new(), post);
  u = std::move(u3);

  std::vector<double> out(b0.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = dt * (b0[c] / 6.0 + b1[c] / 6.0 + 2.0 * b2[c] / 3.0);
  return out;
}

double l1_norm(const SimplicialMesh& mesh, std::span<const Vec2> x, const DGField& u, int c) {
  double s = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) s += element_measure(mesh, x, k) * std::abs(u.cell_average(k, c));
  return s;
}

double total_mass(const SimplicialMesh& mesh, std::span<const Vec2> x, const DGField& u, int c) {
  double s = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) s += element_measure(mesh, x, k) * u.cell_average(k, c);
  return s;
}

MetricField solution_metric(const HessianRecovery& recovery, const SimplicialMesh& mesh, const FluxModel& model,
                            const DGField& u, std::span<const Vec2> x, MetricSource source, int n_smooth) {
  const int d = mesh.dim();
  auto from_values = [&](const std::vector<double>& vals) {
    const RecoveredHessian rh = recovery.recover(vals, x);
    const BetaResult beta = solve_beta(mesh, x, rh.abs_h);
    return metric_from_hessian(rh.abs_h, beta.beta, d);
  };
  std::vector<double> a(mesh.num_elements());
  for (int k = 0; k < mesh.num_elements(); ++k) a[k] = u.cell_average(k, 0);
  MetricField metric;
  if (source == MetricSource::scalar) {
    metric = from_values(a);
  } else {
    const auto* euler = dynamic_cast<const Euler*>(&model);
    if (!euler) throw std::invalid_argument("density/entropy metric needs the Euler model");
    std::vector<double> s(mesh.num_elements());
    State ubar(u.components);
    for (int k = 0; k < mesh.num_elements(); ++k) {
      for (int c = 0; c < u.components; ++c) ubar[c] = u.cell_average(k, c);
      euler->check_state(ubar);
      s[k] = euler->entropy(ubar);
    }
    metric = metric_intersection(from_values(a), from_values(s));
  }
  return smooth_metric(metric, mesh, x, n_smooth);
}

MmpdeMotion::MmpdeMotion(const SimplicialMesh& mesh, const FluxModel& model, MetricSource source, MmpdeParams params,
                         std::vector<Vec2> xi)
    : mesh_(&mesh), model_(&model), source_(source), params_(params), xi_(std::move(xi)), recovery_(mesh) {}

std::vector<Vec2> MmpdeMotion::target(const DGSpace&, const DGField& u, std::span<const Vec2> x, double,
                                      double dt_tilde) {
  metric_ = solution_metric(recovery_, *mesh_, *model_, u, x, source_, params_.n_smooth);
  return adapt_mesh(*mesh_, xi_, x, metric_, params_, dt_tilde);
}

MmdgSolver::MmdgSolver(const DGSpace& space, const FluxModel& model, SolverConfig config, MeshMotion& motion,
                       std::vector<Vec2> x0, DGField u0, double t0)
    : space_(&space),
      model_(&model),
      config_(std::move(config)),
      motion_(&motion),
      x_(std::move(x0)),
      u_(std::move(u0)),
      t_(t0),
      outflow_(u_.components, 0.0) {
  if (u_.num_elements != space.mesh().num_elements()) throw std::invalid_argument("field does not match the mesh");
  if (config_.integrator == Integrator::euler_p0 && space.degree() != 0) {
    throw std::invalid_argument("euler_p0 integrator requires k = 0");
  }
}

StepRecord MmdgSolver::advance(double t_stop, const std::string& stop_reason) {
  const SimplicialMesh& mesh = space_->mesh();
  const auto& fw = space_->face_quadrature().weights;
  const double c_cfl = config_.cfl.c_cfl;
  const PolicyPair pol = config_.cfl.policies;
  if (!(t_stop > t_)) throw std::invalid_argument("t_stop must lie ahead of the current time");

  // (1.1) step size on the fixed mesh, alpha from F.n only
  const AggregatedAlpha tilde(pol.cfl, alpha_point_table(*space_, *model_, u_, x_, {}, t_), mesh);
  const double dt_tilde = dt_coupled(mesh, x_, face_alpha_values(tilde, fw), c_cfl).dt;

  // (1.2)-(1.4) target mesh and nodal velocity
  std::vector<Vec2> target = x_;
  std::vector<Vec2> velocity(x_.size(), Vec2::Zero());
  if (!motion_->stationary() && std::isfinite(dt_tilde)) {
    try {
      target = motion_->target(*space_, u_, x_, t_, dt_tilde);
    } catch (const MeshAdaptError& e) {
      throw InstabilityError(std::string("mesh adaptation failed: ") + e.what(), t_);
    }
    velocity = nodal_velocity(x_, target, dt_tilde);
  }

  // (1.5) step size with the mesh velocity on both meshes
  const AlphaTable table = alpha_point_table(*space_, *model_, u_, x_, velocity, t_);
  const AggregatedAlpha a_cfl(pol.cfl, table, mesh);
  const AggregatedAlpha a_lf(pol.lf, table, mesh);
  const std::vector<double> fa = face_alpha_values(a_cfl, fw);
  DtReport rep = dt_two_mesh(mesh, x_, target, fa, c_cfl);
  rep.dominance_ok = check_dominance(a_cfl, a_lf).ok;
  double dt = rep.dt;
  std::string cap = "none";
  if (dt > config_.cfl.dt_max) {
    dt = config_.cfl.dt_max;
    cap = "dt_max";
  }
  if (t_ + dt >= t_stop) {
    dt = t_stop - t_;
    cap = stop_reason;
  }
  if (audit_on_) audit_ = StepAudit{x_, target, table, fa, rep.dt};

  // (1.6) realized mesh
  int halvings = 0;
  std::vector<Vec2> x_new(x_.size());
  while (true) {
    if (!(dt >= config_.dt_min) || !std::isfinite(dt)) {
      std::ostringstream os;
      os << "time step collapsed: dt = " << dt << " at t = " << t_ << " (step " << n_ << ")";
      throw InstabilityError(os.str(), t_);
    }
    for (std::size_t i = 0; i < x_.size(); ++i) x_new[i] = x_[i] + dt * velocity[i];
    if (validate_mesh(mesh, x_new).ok()) break;
    if (++halvings > config_.max_dt_halvings) throw InstabilityError("realized mesh stays invalid", t_);
    dt *= 0.5;
    cap = "mesh_validity";
  }

  // (2) physical step on the moving mesh, alpha_LF frozen at t_n
  const MovingMesh mm(mesh, x_, x_new, t_, t_ + dt);
  frozen_ = table;
  const StagePost post{&config_.limiter, model_, true};
  std::vector<double> out;
  try {
    if (config_.integrator == Integrator::euler_p0) {
      out = euler_step(*space_, *model_, u_, mm, a_lf, StagePost{nullptr, model_, true});
    } else {
      out = ssp_rk3_step(*space_, *model_, u_, mm, a_lf, post);
    }
  } catch (const StateError& e) {
    std::ostringstream os;
    os << "nonphysical state at t = " << t_ << " (step " << n_ << "): " << e.what();
    throw InstabilityError(os.str(), t_);
  }
  for (std::size_t c = 0; c < out.size(); ++c) outflow_[c] += out[c];
  t_ = (cap == stop_reason) ? t_stop : t_ + dt;
  x_ = std::move(x_new);
  ++n_;

  StepRecord r;
  r.n = n_;
  r.t = t_;
  r.dt = dt;
  r.dt_tilde = dt_tilde;
  r.l1 = l1_norm(mesh, x_, u_);
  r.mass = total_mass(mesh, x_, u_);
  const MeshReport mr = validate_mesh(mesh, x_);
  r.min_measure = mr.min_measure;
  r.min_sigma = mr.min_height;
  r.argmax_element = rep.argmax_element;
  r.dominance_ok = rep.dominance_ok;
  r.cap_reason = cap;
  r.halvings = halvings;
  return r;
}

}  // namespace mmdg
