#include "dfplan/gp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace dfplan {

VecX SupportState::stacked() const {
  VecX x(position.size() * 2);
  x << position, velocity;
  return x;
}

SupportState SupportState::from_stacked(const VecX& x) {
  const auto d = x.size() / 2;
  return {x.head(d), x.tail(d)};
}

void Trajectory::validate() const {
  if (states.size() < 2) throw std::invalid_argument("trajectory needs at least 2 states");
  if (!(dt > 0.0)) throw std::invalid_argument("trajectory dt must be > 0");
  const auto d = states.front().position.size();
  for (const auto& s : states)
    if (s.position.size() != d || s.velocity.size() != d)
      throw std::invalid_argument("trajectory states have inconsistent dimensions");
}

Trajectory init_straight_line(const VecX& xc, const VecX& xg, double dt, int n_states, double t0) {
  if (n_states < 2) throw std::invalid_argument("init_straight_line: need at least 2 states");
  if (xc.size() != xg.size()) throw std::invalid_argument("init_straight_line: dimension mismatch");
  Trajectory t;
  t.dt = dt;
  t.t0 = t0;
  const VecX vel = (xg - xc) / ((n_states - 1) * dt);
  for (int i = 0; i < n_states; ++i) {
    const double a = static_cast<double>(i) / (n_states - 1);
    VecX p = xc + a * (xg - xc);
    if (i == 0) p = xc;
    if (i == n_states - 1) p = xg;
    t.states.push_back({p, vel});
  }
  return t;
}

MatX gp_transition(int dof, double tau) {
  MatX phi = MatX::Identity(2 * dof, 2 * dof);
  phi.topRightCorner(dof, dof) = tau * MatX::Identity(dof, dof);
  return phi;
}

namespace {

void check_qc(const MatX& qc) {
  if (qc.rows() != qc.cols() || qc.rows() == 0)
    throw std::invalid_argument("Qc must be a non-empty square matrix");
  Eigen::LLT<MatX> llt(qc);
  if (llt.info() != Eigen::Success || !qc.isApprox(qc.transpose()))
    throw std::invalid_argument("Qc must be symmetric positive definite");
}

}  // namespace

MatX gp_covariance(const MatX& qc, double tau) {
  check_qc(qc);
  const auto d = qc.rows();
  MatX q(2 * d, 2 * d);
  q.topLeftCorner(d, d) = (tau * tau * tau / 3.0) * qc;
  q.topRightCorner(d, d) = (tau * tau / 2.0) * qc;
  q.bottomLeftCorner(d, d) = (tau * tau / 2.0) * qc;
  q.bottomRightCorner(d, d) = tau * qc;
  return q;
}

GpPriorResidual gp_prior_residual(const SupportState& xi, const SupportState& xi1, double dt,
                                  const MatX& qc) {
  const auto d = xi.position.size();
  if (qc.rows() != d || xi1.position.size() != d || xi.velocity.size() != d ||
      xi1.velocity.size() != d)
    throw std::invalid_argument("gp_prior_residual: dimension mismatch");
  GpPriorResidual r;
  r.covariance = gp_covariance(qc, dt);
  r.residual.resize(2 * d);
  r.residual.head(d) = xi.position + dt * xi.velocity - xi1.position;
  r.residual.tail(d) = xi.velocity - xi1.velocity;
  return r;
}

double gp_prior_mahalanobis(const GpPriorResidual& r) {
  return r.residual.dot(r.covariance.llt().solve(r.residual));
}

GpInterpolationWeights gp_interpolation_weights(const MatX& qc, double dt, double tau) {
  const int d = static_cast<int>(qc.rows());
  const MatX q_dt = gp_covariance(qc, dt);
  const MatX q_tau = gp_covariance(qc, tau);
  const MatX phi_rest_t = gp_transition(d, dt - tau).transpose();
  // psi = Q(τ) Φ(dt−τ)ᵀ Q(dt)⁻¹, computed via a solve on the transpose.
  const MatX rhs = (q_tau * phi_rest_t).transpose();
  GpInterpolationWeights w;
  w.psi = q_dt.llt().solve(rhs).transpose();
  w.lambda = gp_transition(d, tau) - w.psi * gp_transition(d, dt);
  return w;
}

SupportState gp_interpolate(const Trajectory& traj, double tau, const MatX& qc) {
  traj.validate();
  const double span = traj.duration();
  const double rel = tau - traj.t0;
  const double tol = 1e-12 * std::max(1.0, std::abs(traj.end_time()));
  if (!(rel >= -tol) || !(rel <= span + tol))
    throw std::out_of_range("gp_interpolate: time outside trajectory");
  if (tau == traj.end_time() || rel >= span) return traj.states.back();
  if (rel <= 0.0) return traj.states.front();

  int i = static_cast<int>(std::floor(rel / traj.dt));
  i = std::clamp(i, 0, traj.size() - 2);
  double offset = rel - i * traj.dt;
  if (offset < 0.0) {
    // floor() landed one segment late because of rounding.
    --i;
    offset += traj.dt;
  }
  if (offset == 0.0 || tau == traj.time_of(i)) return traj.states[i];
  if (offset >= traj.dt || tau == traj.time_of(i + 1)) return traj.states[i + 1];

  if (qc.rows() != traj.dof()) throw std::invalid_argument("gp_interpolate: Qc size mismatch");
  // Q(τ) = K(τ) ⊗ Qc and Φ(τ) = P(τ) ⊗ I, so Qc cancels from the weights
  // and only 2×2 scalar blocks are needed.
  const auto w = scalar_interpolation_weights(traj.dt, offset);
  const SupportState& a = traj.states[i];
  const SupportState& b = traj.states[i + 1];
  SupportState out;
  out.position = w.lambda(0, 0) * a.position + w.lambda(0, 1) * a.velocity +
                 w.psi(0, 0) * b.position + w.psi(0, 1) * b.velocity;
  out.velocity = w.lambda(1, 0) * a.position + w.lambda(1, 1) * a.velocity +
                 w.psi(1, 0) * b.position + w.psi(1, 1) * b.velocity;
  return out;
}

ScalarInterpolationWeights scalar_interpolation_weights(double dt, double tau) {
  const auto k = [](double t) {
    Eigen::Matrix2d m;
    m << t * t * t / 3.0, t * t / 2.0, t * t / 2.0, t;
    return m;
  };
  const auto p = [](double t) {
    Eigen::Matrix2d m;
    m << 1.0, t, 0.0, 1.0;
    return m;
  };
  ScalarInterpolationWeights w;
  w.psi = k(tau) * p(dt - tau).transpose() * k(dt).inverse();
  w.lambda = p(tau) - w.psi * p(dt);
  return w;
}

}  // namespace dfplan
