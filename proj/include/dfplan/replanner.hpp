#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dfplan/planner.hpp"
#include "dfplan/world_sim.hpp"

namespace dfplan {

struct ReplanConfig {
  double monitor_rate = 250.0;   // Hz
  double replan_rate_cap = 10.0; // Hz
  double map_rate = 25.0;        // Hz, world/field updates in lockstep mode
  double cost_tolerance_factor = 1.5;
  double abs_slack = 1e-3;
  double goal_tol = 0.02;        // per DoF
  double exec_interp_dt = 0.004; // s
  double timeout = 60.0;         // simulated seconds
  /// Plans are timed for vmax / velocity_headroom so the executed peak speed
  /// of a rest-to-rest solution stays under vmax.
  double velocity_headroom = 2.0;

  void validate() const;
  bool operator==(const ReplanConfig&) const = default;
};

struct HorizonEstimate {
  int n_states = 3;
  double dt = 0.2;
  double total_time = 0.4;
};

/// total_time = max_j |xg_j − xc_j| / vmax_j rounded up to a multiple of dt
/// (at least 2·dt); N = total_time / dt + 1.
HorizonEstimate estimate_parameters(const VecX& xc, const VecX& xg, const VecX& vmax, double dt);

enum class ExecStatus { kExecuting, kReplanning, kReached, kFailed };
const char* to_string(ExecStatus s);

struct ExecutionState {
  double clock = 0.0;
  SupportState current;
  Trajectory active;
  double initial_cost = 0.0;
  ExecStatus status = ExecStatus::kExecuting;
};

enum class Validity { kValid, kCollision, kCost };
const char* to_string(Validity v);

struct ValidityReport {
  Validity verdict = Validity::kValid;
  double time = 0.0;        // first colliding sample time (collision)
  double cost = 0.0;        // graph cost on the current field
  double threshold = 0.0;   // initial_cost · factor + slack
  double min_clearance = 0.0;

  bool valid() const { return verdict == Validity::kValid; }
  std::string reason() const;
};

/// Collision check of the remaining trajectory (every exec_interp_dt from the
/// current clock) against `graph.field()`, then the cost test.
ValidityReport still_valid(const ExecutionState& exec, const FactorGraph& graph,
                           const ReplanConfig& cfg);

/// State 0 is xc; the remaining new support times are mapped proportionally
/// onto the old trajectory's remaining span [t0, end] and filled by GP
/// interpolation. Velocities are rescaled by the time-mapping ratio.
Trajectory refit_trajectory(const Trajectory& old, const SupportState& xc, int new_n, double dt,
                            const MatX& qc, double t0);

/// Largest |q̇_j| / vmax_j over the GP-interpolated trajectory, sampled every `step`.
double peak_speed_ratio(const Trajectory& t, const MatX& qc, const VecX& vmax, double step);

/// Same path traversed `factor` times slower: dt scaled up, velocities down.
Trajectory time_scaled(const Trajectory& t, double factor);

struct PlanRecord {
  int index = 0;
  double time = 0.0;
  std::string trigger;  // initial | collision | cost | horizon
  std::string init;     // straight | refit
  int n_states = 0;
  double dt = 0.0;
  int iterations = 0;
  double time_scale = 1.0;  // > 1 when the solution was slowed to respect vmax
  std::string stop_reason;
  double initial_error = 0.0;
  double final_error = 0.0;
  bool collision_free = false;
  double min_clearance = 0.0;
  double plan_ms = 0.0;  // wall clock; kept out of the JSON log
};

struct ExecSample {
  double time = 0.0;
  VecX position;
  double clearance = 0.0;  // minimum sphere clearance on the field at that time
  int plan = 0;
};

struct ExecutionLog {
  std::string scenario;
  ExecStatus status = ExecStatus::kExecuting;
  std::string reason;
  double finish_time = 0.0;
  std::vector<PlanRecord> plans;
  std::vector<ExecSample> samples;
  int monitor_checks = 0;
  int invalid_checks = 0;
  double min_clearance = 0.0;
  std::vector<double> monitor_ms;  // wall clock per evaluated monitor check
  std::vector<double> replan_ms;

  int replans() const { return plans.empty() ? 0 : static_cast<int>(plans.size()) - 1; }
  bool reached() const { return status == ExecStatus::kReached; }
};

/// Deterministic JSON (no wall-clock data).
void write_log_json(std::ostream& os, const ExecutionLog& log);
/// One row per executed sample: t, q…, clearance, plan.
void write_log_csv(std::ostream& os, const ExecutionLog& log);
/// Wall-clock timings: kind, index, ms.
void write_timings_csv(std::ostream& os, const ExecutionLog& log);

struct ReplanProblem {
  std::string name;
  RobotModel model;
  VecX start;
  VecX goal;
  PlannerParams params;  // params.lm is overridden by the re-planning profile
  ReplanConfig cfg;
};

/// Lockstep run: world, monitor and planner advance on one simulated clock.
/// Planning takes zero simulated time.
ExecutionLog run_replanning(const ReplanProblem& problem, WorldSim& world);

/// Free-running run: a map thread steps the world at map_rate in wall time,
/// the executor/monitor runs at monitor_rate, and re-plans run on a worker
/// while execution continues on the old trajectory. Not bit-reproducible.
ExecutionLog run_replanning_threaded(const ReplanProblem& problem, WorldSim& world);

}  // namespace dfplan
