#include "dfplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace dfplan {

MatX PlannerParams::qc_matrix(int dof) const {
  if (qc_full.size() > 0) {
    if (qc_full.rows() != dof || qc_full.cols() != dof)
      throw std::invalid_argument("planner: Qc matrix size does not match robot DoF");
    return qc_full;
  }
  return isotropic_qc(dof, qc);
}

void PlannerParams::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("planner: dt must be > 0");
  if (qc_full.size() == 0 && !(qc > 0.0)) throw std::invalid_argument("planner: qc must be > 0");
  if (!(prior_sigma > 0.0)) throw std::invalid_argument("planner: prior_sigma must be > 0");
  if (!(eps >= 0.0)) throw std::invalid_argument("planner: eps must be >= 0");
  if (!(obs_sigma > 0.0)) throw std::invalid_argument("planner: obs_sigma must be > 0");
  if (n_interp < 0) throw std::invalid_argument("planner: n_interp must be >= 0");
  if (!(lm.lambda_init > 0.0) || !(lm.lambda_factor > 1.0) || lm.max_iters < 1)
    throw std::invalid_argument("planner: invalid Levenberg-Marquardt settings");
}

ObstacleEval obstacle_residual(const RobotModel& model, const VecX& q, const DistanceField& field,
                               double eps, double obs_sigma, bool with_jacobian) {
  const auto kin = sphere_kinematics(model, q, with_jacobian);
  const auto n = static_cast<Eigen::Index>(model.spheres.size());
  ObstacleEval ev;
  ev.residual = VecX::Zero(n);
  ev.clearance.resize(n);
  if (with_jacobian) ev.jacobian = MatX::Zero(n, model.dof());
  for (Eigen::Index s = 0; s < n; ++s) {
    const FieldQuery fq = field.query(kin.centers[s]);
    ev.clamped = ev.clamped || fq.clamped;
    const double d = fq.distance - model.spheres[s].radius;
    ev.clearance[s] = d;
    if (d < eps) {
      ev.residual[s] = (eps - d) / obs_sigma;
      if (with_jacobian) ev.jacobian.row(s) = -(fq.gradient.transpose() * kin.jacobians[s]) / obs_sigma;
    }
  }
  return ev;
}

MatX BlockTridiagonal::to_dense() const {
  if (diag.empty()) return {};
  const auto b = diag.front().rows();
  const auto n = static_cast<Eigen::Index>(diag.size());
  MatX h = MatX::Zero(n * b, n * b);
  for (Eigen::Index i = 0; i < n; ++i) h.block(i * b, i * b, b, b) = diag[i];
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    h.block(i * b, (i + 1) * b, b, b) = upper[i];
    h.block((i + 1) * b, i * b, b, b) = upper[i].transpose();
  }
  return h;
}

bool solve_block_tridiagonal(const BlockTridiagonal& h, double damping, const VecX& rhs, VecX& x) {
  const std::size_t n = h.diag.size();
  if (n == 0) return false;
  const auto b = h.diag.front().rows();
  std::vector<Eigen::LLT<MatX>> chol(n);
  std::vector<MatX> m(n > 0 ? n - 1 : 0);  // m[i] = L_i⁻¹ U_i
  const MatX eye = MatX::Identity(b, b);

  MatX s = h.diag[0] + damping * eye;
  for (std::size_t i = 0; i < n; ++i) {
    chol[i].compute(s);
    if (chol[i].info() != Eigen::Success) return false;
    if (i + 1 < n) {
      m[i] = chol[i].matrixL().solve(h.upper[i]);
      s = h.diag[i + 1] + damping * eye - m[i].transpose() * m[i];
    }
  }
  // Forward substitution with L, then backward with Lᵀ.
  std::vector<VecX> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    VecX r = rhs.segment(i * b, b);
    if (i > 0) r -= m[i - 1].transpose() * y[i - 1];
    y[i] = chol[i].matrixL().solve(r);
  }
  x.resize(rhs.size());
  VecX next;
  for (std::size_t k = n; k-- > 0;) {
    VecX r = y[k];
    if (k + 1 < n) r -= m[k] * next;
    next = chol[k].matrixU().solve(r);
    x.segment(k * b, b) = next;
  }
  return x.allFinite();
}

FactorGraph::FactorGraph(RobotModel model, PlannerParams params,
                         std::shared_ptr<const DistanceField> field, int n_states,
                         std::vector<Factor> factors)
    : model_(std::move(model)),
      params_(std::move(params)),
      field_(std::move(field)),
      n_states_(n_states),
      dof_(model_.dof()),
      factors_(std::move(factors)) {
  if (!field_) throw std::invalid_argument("FactorGraph: null distance field");
  if (n_states_ < 2) throw std::invalid_argument("FactorGraph: need at least 2 states");
  params_.validate();
  qc_ = params_.qc_matrix(dof_);
  phi_ = gp_transition(dof_, params_.dt);
  const MatX q = gp_covariance(qc_, params_.dt);
  Eigen::LLT<MatX> llt(q);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("FactorGraph: GP covariance not PD");
  gp_whiten_ = llt.matrixL().solve(MatX::Identity(2 * dof_, 2 * dof_));
  for (int k = 1; k <= params_.n_interp; ++k)
    interp_.push_back(
        gp_interpolation_weights(qc_, params_.dt, params_.dt * k / (params_.n_interp + 1)));
  for (const auto& f : factors_) {
    const bool pair = f.kind == FactorKind::kGpPrior || (f.kind == FactorKind::kObstacle && f.sub > 0);
    if (f.state < 0 || f.state >= n_states_ || (pair && f.state + 1 >= n_states_) ||
        (f.kind == FactorKind::kObstacle && f.sub > params_.n_interp))
      throw std::invalid_argument("FactorGraph: factor references an invalid state");
    if (f.kind == FactorKind::kStatePrior && f.mean.size() != 2 * dof_)
      throw std::invalid_argument("FactorGraph: prior mean has wrong dimension");
  }
}

std::size_t FactorGraph::count(FactorKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.kind == kind; }));
}

FactorGraph FactorGraph::with_field(std::shared_ptr<const DistanceField> field) const {
  FactorGraph g = *this;
  if (!field) throw std::invalid_argument("FactorGraph: null distance field");
  g.field_ = std::move(field);
  return g;
}

void FactorGraph::check(const Trajectory& traj) const {
  if (traj.size() != n_states_ || traj.dof() != dof_)
    throw std::invalid_argument("trajectory does not match factor graph dimensions");
}

VecX FactorGraph::site_configuration(const Trajectory& traj, int state, int sub) const {
  if (sub == 0) return traj.states[state].position;
  const auto& w = interp_[sub - 1];
  return w.lambda.topRows(dof_) * traj.states[state].stacked() +
         w.psi.topRows(dof_) * traj.states[state + 1].stacked();
}

FactorLinearization FactorGraph::linearize_factor(std::size_t index, const Trajectory& traj) const {
  const Factor& f = factors_[index];
  const int d = dof_;
  FactorLinearization out;
  switch (f.kind) {
    case FactorKind::kStatePrior: {
      const double inv = 1.0 / params_.prior_sigma;
      out.residual = (traj.states[f.state].stacked() - f.mean) * inv;
      out.blocks.emplace_back(f.state, inv * MatX::Identity(2 * d, 2 * d));
      break;
    }
    case FactorKind::kGpPrior: {
      const VecX r = phi_ * traj.states[f.state].stacked() - traj.states[f.state + 1].stacked();
      out.residual = gp_whiten_ * r;
      out.blocks.emplace_back(f.state, gp_whiten_ * phi_);
      out.blocks.emplace_back(f.state + 1, -gp_whiten_);
      break;
    }
    case FactorKind::kObstacle: {
      const VecX q = site_configuration(traj, f.state, f.sub);
      const ObstacleEval ev = obstacle_residual(model_, q, *field_, params_.eps, params_.obs_sigma, true);
      out.residual = ev.residual;
      if (f.sub == 0) {
        MatX j = MatX::Zero(ev.jacobian.rows(), 2 * d);
        j.leftCols(d) = ev.jacobian;
        out.blocks.emplace_back(f.state, std::move(j));
      } else {
        const auto& w = interp_[f.sub - 1];
        out.blocks.emplace_back(f.state, ev.jacobian * w.lambda.topRows(d));
        out.blocks.emplace_back(f.state + 1, ev.jacobian * w.psi.topRows(d));
      }
      break;
    }
  }
  return out;
}

double FactorGraph::factor_error(std::size_t index, const Trajectory& traj) const {
  const Factor& f = factors_[index];
  switch (f.kind) {
    case FactorKind::kStatePrior:
      return 0.5 * ((traj.states[f.state].stacked() - f.mean) / params_.prior_sigma).squaredNorm();
    case FactorKind::kGpPrior: {
      const VecX r = phi_ * traj.states[f.state].stacked() - traj.states[f.state + 1].stacked();
      return 0.5 * (gp_whiten_ * r).squaredNorm();
    }
    case FactorKind::kObstacle: {
      const VecX q = site_configuration(traj, f.state, f.sub);
      return 0.5 * obstacle_residual(model_, q, *field_, params_.eps, params_.obs_sigma, false)
                       .residual.squaredNorm();
    }
  }
  return 0.0;
}

double FactorGraph::cost(const Trajectory& traj) const {
  check(traj);
  double e = 0.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) e += factor_error(i, traj);
  return e;
}

Linearization FactorGraph::linearize(const Trajectory& traj) const {
  check(traj);
  const int b = 2 * dof_;
  Linearization lin;
  lin.hessian.diag.assign(n_states_, MatX::Zero(b, b));
  lin.hessian.upper.assign(n_states_ - 1, MatX::Zero(b, b));
  lin.gradient = VecX::Zero(static_cast<Eigen::Index>(n_states_) * b);
  for (std::size_t fi = 0; fi < factors_.size(); ++fi) {
    const FactorLinearization fl = linearize_factor(fi, traj);
    lin.error += 0.5 * fl.residual.squaredNorm();
    for (const auto& [si, ji] : fl.blocks) {
      lin.hessian.diag[si].noalias() += ji.transpose() * ji;
      lin.gradient.segment(static_cast<Eigen::Index>(si) * b, b).noalias() += ji.transpose() * fl.residual;
      for (const auto& [sj, jj] : fl.blocks)
        if (sj == si + 1) lin.hessian.upper[si].noalias() += ji.transpose() * jj;
    }
  }
  return lin;
}

VecX FactorGraph::stacked_residual(const Trajectory& traj) const {
  check(traj);
  std::vector<VecX> parts;
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    parts.push_back(linearize_factor(i, traj).residual);
    rows += parts.back().size();
  }
  VecX r(rows);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    r.segment(at, p.size()) = p;
    at += p.size();
  }
  return r;
}

MatX FactorGraph::stacked_jacobian(const Trajectory& traj) const {
  check(traj);
  const int b = 2 * dof_;
  std::vector<FactorLinearization> parts;
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    parts.push_back(linearize_factor(i, traj));
    rows += parts.back().residual.size();
  }
  MatX j = MatX::Zero(rows, static_cast<Eigen::Index>(n_states_) * b);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    for (const auto& [si, blk] : p.blocks) j.block(at, static_cast<Eigen::Index>(si) * b, blk.rows(), b) = blk;
    at += p.residual.size();
  }
  return j;
}

FactorGraph build_graph(const RobotModel& model, const SupportState& start, const SupportState& goal,
                        const PlannerParams& params, std::shared_ptr<const DistanceField> field,
                        int n_states) {
  const int d = model.dof();
  if (n_states < 2) throw std::invalid_argument("build_graph: need at least 2 states");
  if (start.position.size() != d || start.velocity.size() != d || goal.position.size() != d ||
      goal.velocity.size() != d)
    throw std::invalid_argument("build_graph: start/goal dimension does not match robot DoF");
  std::vector<Factor> factors;
  factors.push_back({FactorKind::kStatePrior, 0, 0, start.stacked()});
  factors.push_back({FactorKind::kStatePrior, n_states - 1, 0, goal.stacked()});
  for (int i = 0; i + 1 < n_states; ++i) factors.push_back({FactorKind::kGpPrior, i, 0, {}});
  for (int i = 0; i < n_states; ++i) {
    factors.push_back({FactorKind::kObstacle, i, 0, {}});
    if (i + 1 < n_states)
      for (int k = 1; k <= params.n_interp; ++k) factors.push_back({FactorKind::kObstacle, i, k, {}});
  }
  return FactorGraph(model, params, std::move(field), n_states, std::move(factors));
}

FactorGraph build_graph(const RobotModel& model, const VecX& start, const VecX& goal,
                        const PlannerParams& params, std::shared_ptr<const DistanceField> field,
                        int n_states) {
  const VecX zero = VecX::Zero(start.size());
  return build_graph(model, SupportState{start, zero}, SupportState{goal, VecX::Zero(goal.size())},
                     params, std::move(field), n_states);
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kRelativeDecrease: return "relative_decrease";
    case StopReason::kErrorTolerance: return "error_tolerance";
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kDampingOverflow: return "damping_overflow";
  }
  return "unknown";
}

namespace {

Trajectory apply_step(const Trajectory& t, const VecX& delta) {
  Trajectory out = t;
  const int d = t.dof();
  for (int i = 0; i < t.size(); ++i) {
    out.states[i].position += delta.segment(static_cast<Eigen::Index>(i) * 2 * d, d);
    out.states[i].velocity += delta.segment(static_cast<Eigen::Index>(i) * 2 * d + d, d);
  }
  return out;
}

}  // namespace

OptimizeResult optimize_lm(const FactorGraph& graph, const Trajectory& init, const LmParams& lm) {
  OptimizeResult res;
  res.trajectory = init;
  double error = graph.cost(init);
  res.initial_error = error;
  double lambda = lm.lambda_init;

  while (true) {
    if (error <= lm.abs_error_tol) {
      res.reason = StopReason::kErrorTolerance;
      break;
    }
    if (res.iterations >= lm.max_iters) {
      res.reason = StopReason::kMaxIterations;
      break;
    }
    const Linearization lin = graph.linearize(res.trajectory);
    const VecX rhs = -lin.gradient;
    bool accepted = false;
    double new_error = error;
    Trajectory candidate;
    while (!accepted) {
      VecX delta;
      if (solve_block_tridiagonal(lin.hessian, lambda, rhs, delta)) {
        candidate = apply_step(res.trajectory, delta);
        new_error = graph.cost(candidate);
        if (std::isfinite(new_error) && new_error < error) {
          accepted = true;
          lambda = std::max(lambda / lm.lambda_factor, 1e-12);
          break;
        }
      }
      lambda *= lm.lambda_factor;
      if (lambda > lm.lambda_max) break;
    }
    if (!accepted) {
      res.reason = StopReason::kDampingOverflow;
      break;
    }
    ++res.iterations;
    const double rel = (error - new_error) / error;
    res.trajectory = std::move(candidate);
    error = new_error;
    res.error_history.push_back(error);
    if (rel < lm.rel_decrease_tol) {
      res.reason = StopReason::kRelativeDecrease;
      break;
    }
  }
  res.final_error = error;
  return res;
}

ClearanceReport trajectory_clearance(const RobotModel& model, const Trajectory& traj,
                                     const DistanceField& field, const MatX& qc, double step,
                                     double from_time) {
  if (!(step > 0.0)) throw std::invalid_argument("trajectory_clearance: step must be > 0");
  std::vector<double> times;
  const double start = std::max(from_time, traj.t0);
  const double end = traj.end_time();
  for (int k = 0;; ++k) {
    const double t = start + k * step;
    if (t >= end) break;
    times.push_back(t);
  }
  for (int i = 0; i < traj.size(); ++i)
    if (traj.time_of(i) >= start) times.push_back(traj.time_of(i));
  times.push_back(end);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  ClearanceReport rep;
  rep.min_clearance = std::numeric_limits<double>::infinity();
  for (double t : times) {
    const SupportState s = gp_interpolate(traj, std::min(t, end), qc);
    const auto centers = forward_kinematics(model, s.position);
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double c = field.distance(centers[k]) - model.spheres[k].radius;
      if (c < rep.min_clearance) {
        rep.min_clearance = c;
        rep.time_of_min = t;
      }
      if (!(c > 0.0) && rep.collision_free) {
        rep.collision_free = false;
        rep.first_collision_time = t;
        rep.first_collision_sphere = static_cast<int>(k);
      }
    }
  }
  return rep;
}

}  // namespace dfplan
