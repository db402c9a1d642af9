#pragma once

#include <vector>

#include "dfplan/robot.hpp"

// Constant-velocity Gaussian-process trajectory prior: white-noise
// acceleration with power-spectral density Qc, state x = [q; q̇].

namespace dfplan {

struct SupportState {
  VecX position;
  VecX velocity;

  VecX stacked() const;
  static SupportState from_stacked(const VecX& x);
};

struct Trajectory {
  double dt = 0.1;
  double t0 = 0.0;
  std::vector<SupportState> states;

  int dof() const { return states.empty() ? 0 : static_cast<int>(states.front().position.size()); }
  int size() const { return static_cast<int>(states.size()); }
  double duration() const { return dt * (size() - 1); }
  double end_time() const { return t0 + duration(); }
  double time_of(int i) const { return t0 + dt * i; }
  void validate() const;
};

/// Positions linearly spaced from xc to xg with the matching constant velocity.
Trajectory init_straight_line(const VecX& xc, const VecX& xg, double dt, int n_states,
                              double t0 = 0.0);

/// Φ(τ) = [[I, τI], [0, I]].
MatX gp_transition(int dof, double tau);
/// Q(τ) = [[τ³/3 Qc, τ²/2 Qc], [τ²/2 Qc, τ Qc]]. Throws if Qc is not positive definite.
MatX gp_covariance(const MatX& qc, double tau);

struct GpPriorResidual {
  VecX residual;    // Φ(dt) x_i − x_{i+1}
  MatX covariance;  // Q(dt)
};

GpPriorResidual gp_prior_residual(const SupportState& xi, const SupportState& xi1, double dt,
                                  const MatX& qc);

/// ‖r‖² in the metric of Q⁻¹.
double gp_prior_mahalanobis(const GpPriorResidual& r);

/// Posterior-mean weights for a point `tau` into a segment of length `dt`:
/// x(τ) = lambda · x_i + psi · x_{i+1}.
struct GpInterpolationWeights {
  MatX lambda;
  MatX psi;
};

GpInterpolationWeights gp_interpolation_weights(const MatX& qc, double dt, double tau);

/// The same weights with Qc factored out: lambda = λ ⊗ I, psi = ψ ⊗ I.
struct ScalarInterpolationWeights {
  Eigen::Matrix2d lambda;
  Eigen::Matrix2d psi;
};

ScalarInterpolationWeights scalar_interpolation_weights(double dt, double tau);

/// Posterior mean at absolute time `tau`; exact support states at support times.
SupportState gp_interpolate(const Trajectory& traj, double tau, const MatX& qc);

/// Qc = qc·I for a given DoF.
inline MatX isotropic_qc(int dof, double qc) { return qc * MatX::Identity(dof, dof); }

}  // namespace dfplan
