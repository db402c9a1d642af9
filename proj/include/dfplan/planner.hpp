#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dfplan/distance_field.hpp"
#include "dfplan/gp.hpp"
#include "dfplan/robot.hpp"

namespace dfplan {

struct LmParams {
  double lambda_init = 0.01;
  double lambda_factor = 10.0;
  double lambda_max = 1e5;
  double rel_decrease_tol = 1e-5;
  int max_iters = 100;
  /// Stop once the total error is at or below this value.
  double abs_error_tol = 1e-5;

  bool operator==(const LmParams&) const = default;
};

/// Offline study profile: relative decrease 1e-5, 100 iterations.
inline LmParams study_profile() { return {}; }
/// Online re-planning profile: relative decrease 0.01, 50 iterations.
inline LmParams replan_profile() {
  LmParams p;
  p.rel_decrease_tol = 0.01;
  p.max_iters = 50;
  return p;
}

struct PlannerParams {
  double dt = 0.2;
  /// Qc = qc·I unless `qc_full` is non-empty.
  double qc = 1.0;
  MatX qc_full;
  double prior_sigma = 1e-4;
  double eps = 0.2;
  double obs_sigma = 0.05;
  int n_interp = 3;
  LmParams lm;

  MatX qc_matrix(int dof) const;
  void validate() const;
  bool operator==(const PlannerParams& o) const {
    return dt == o.dt && qc == o.qc && qc_full == o.qc_full && prior_sigma == o.prior_sigma &&
           eps == o.eps && obs_sigma == o.obs_sigma && n_interp == o.n_interp && lm == o.lm;
  }
};

struct ObstacleEval {
  VecX residual;     // whitened hinge per sphere
  MatX jacobian;     // whitened, spheres × dof
  VecX clearance;    // field distance minus radius, per sphere
  bool clamped = false;
};

/// Hinge-loss obstacle cost for every collision sphere at configuration q.
ObstacleEval obstacle_residual(const RobotModel& model, const VecX& q, const DistanceField& field,
                               double eps, double obs_sigma, bool with_jacobian = true);

enum class FactorKind { kStatePrior, kGpPrior, kObstacle };

struct Factor {
  FactorKind kind;
  int state = 0;     // first (or only) state
  int sub = 0;       // obstacle: 0 at the support, k in 1..n_interp between state and state+1
  VecX mean;         // state prior target, stacked [q; q̇]
};

/// One factor linearized at a trajectory: whitened residual plus a Jacobian
/// block per touched state (columns over that state's stacked [q; q̇]).
struct FactorLinearization {
  VecX residual;
  std::vector<std::pair<int, MatX>> blocks;
};

/// Symmetric block-tridiagonal matrix over support states.
struct BlockTridiagonal {
  std::vector<MatX> diag;   // n blocks, 2d × 2d
  std::vector<MatX> upper;  // n − 1 blocks coupling state i to i + 1

  MatX to_dense() const;
};

struct Linearization {
  BlockTridiagonal hessian;  // JᵀJ
  VecX gradient;             // Jᵀr
  double error = 0.0;        // ½‖r‖²
};

/// Solves (H + damping·I) x = rhs by block Cholesky. Returns false when the
/// damped system is not positive definite.
bool solve_block_tridiagonal(const BlockTridiagonal& h, double damping, const VecX& rhs, VecX& x);

class FactorGraph {
 public:
  FactorGraph(RobotModel model, PlannerParams params, std::shared_ptr<const DistanceField> field,
              int n_states, std::vector<Factor> factors);

  const RobotModel& model() const { return model_; }
  const PlannerParams& params() const { return params_; }
  const std::shared_ptr<const DistanceField>& field() const { return field_; }
  const std::vector<Factor>& factors() const { return factors_; }
  int n_states() const { return n_states_; }
  int dof() const { return dof_; }
  const MatX& qc() const { return qc_; }

  std::size_t count(FactorKind kind) const;

  /// Same factors evaluated against another field.
  FactorGraph with_field(std::shared_ptr<const DistanceField> field) const;

  double factor_error(std::size_t index, const Trajectory& traj) const;
  FactorLinearization linearize_factor(std::size_t index, const Trajectory& traj) const;

  /// E(τ) = Σ ½‖r_f‖² over whitened residuals.
  double cost(const Trajectory& traj) const;
  Linearization linearize(const Trajectory& traj) const;

  VecX stacked_residual(const Trajectory& traj) const;
  MatX stacked_jacobian(const Trajectory& traj) const;

  /// Configuration at obstacle site (state, sub).
  VecX site_configuration(const Trajectory& traj, int state, int sub) const;

 private:
  void check(const Trajectory& traj) const;

  RobotModel model_;
  PlannerParams params_;
  std::shared_ptr<const DistanceField> field_;
  int n_states_;
  int dof_;
  std::vector<Factor> factors_;
  MatX qc_;
  MatX phi_;         // Φ(dt)
  MatX gp_whiten_;   // L⁻¹ with Q(dt) = L Lᵀ
  std::vector<GpInterpolationWeights> interp_;  // index k − 1 for sub k
};

/// State priors on the first and last state, N − 1 GP priors and
/// N + (N − 1)·n_interp obstacle factors.
FactorGraph build_graph(const RobotModel& model, const SupportState& start,
                        const SupportState& goal, const PlannerParams& params,
                        std::shared_ptr<const DistanceField> field, int n_states);

/// Start and goal both at rest.
FactorGraph build_graph(const RobotModel& model, const VecX& start, const VecX& goal,
                        const PlannerParams& params, std::shared_ptr<const DistanceField> field,
                        int n_states);

inline double trajectory_cost(const FactorGraph& graph, const Trajectory& traj) {
  return graph.cost(traj);
}

enum class StopReason { kRelativeDecrease, kErrorTolerance, kMaxIterations, kDampingOverflow };
const char* to_string(StopReason r);

struct OptimizeResult {
  Trajectory trajectory;
  int iterations = 0;
  double initial_error = 0.0;
  double final_error = 0.0;
  StopReason reason = StopReason::kMaxIterations;
  std::vector<double> error_history;  // after each accepted iteration

  bool converged() const { return reason != StopReason::kDampingOverflow; }
};

/// Levenberg–Marquardt on the stacked whitened residuals. Accepted steps
/// divide the damping by lambda_factor, rejected ones multiply it.
OptimizeResult optimize_lm(const FactorGraph& graph, const Trajectory& init, const LmParams& lm);

struct ClearanceReport {
  double min_clearance = 0.0;
  double time_of_min = 0.0;
  bool collision_free = true;
  double first_collision_time = -1.0;
  int first_collision_sphere = -1;
};

/// Minimum sphere clearance (field distance − radius) along the GP-interpolated
/// trajectory from `from_time` to its end, sampled every `step` seconds and at
/// every support time. Collision-free means every clearance is > 0.
ClearanceReport trajectory_clearance(const RobotModel& model, const Trajectory& traj,
                                     const DistanceField& field, const MatX& qc, double step,
                                     double from_time);

}  // namespace dfplan
