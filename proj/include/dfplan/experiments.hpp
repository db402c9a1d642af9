#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dfplan/planner.hpp"
#include "dfplan/voxel_map.hpp"

namespace dfplan {

enum class StudyCase { kNav2d, kArm, kWholebody };
const char* to_string(StudyCase c);
StudyCase study_case_from_string(const std::string& s);

struct StudyDesign {
  StudyCase study_case = StudyCase::kNav2d;
  int n_states = 10;
  int n_envs = 50;
  double size_min = 0.0;  // full cuboid edge length, per dimension
  double size_max = 1.0;
  Vec3 workspace_lo = Vec3::Zero();  // cuboid centers and sampled base poses
  Vec3 workspace_hi = Vec3::Zero();
  GridSpec grid;
  std::uint64_t seed = 1;
  int n_support = 11;
  PlannerParams params;  // lm defaults to the study profile
  double check_step = 0.01;  // s, collision-check sampling of solutions
  int max_retries = 10000;

  /// Desk-scale defaults for a case.
  static StudyDesign defaults(StudyCase c);
  std::size_t pair_count() const { return static_cast<std::size_t>(n_states) * (n_states - 1) / 2; }
  std::size_t problem_count() const { return pair_count() * static_cast<std::size_t>(n_envs); }
  void validate() const;
};

struct StudyProblem {
  int index = 0;
  int pair = 0;
  int env = 0;
  int a = 0;  // state indices
  int b = 0;
};

struct ProblemSet {
  RobotModel model;
  std::vector<VecX> states;
  std::vector<Cuboid> envs;
  std::vector<StudyProblem> problems;  // pair-major: index = pair · n_envs + env
  int env_resamples = 0;
};

/// Seeded: collision-free states within limits, all unordered pairs, one
/// random cuboid per environment (resampled until every state is clear).
/// Throws std::runtime_error when retries run out.
ProblemSet generate_problems(const StudyDesign& design);

/// Occupancy of one environment on the design grid.
BinaryMask environment_mask(const StudyDesign& design, const Cuboid& env);

struct SolveRecord {
  bool collision_free = false;
  int iterations = 0;
  double final_cost = 0.0;
  double min_clearance = 0.0;
  StopReason reason = StopReason::kMaxIterations;
};

struct ProblemRecord {
  StudyProblem problem;
  SolveRecord sdf;
  SolveRecord usdf;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};
MeanStd mean_std(const std::vector<double>& v);

struct KindStats {
  double failure_rate = 0.0;          // excluding problems failed under both kinds
  double failure_rate_literal = 0.0;  // excluding problems failed under either kind
  std::size_t failures = 0;
  MeanStd iterations;  // all problems
  MeanStd valid_cost;  // problems collision-free under both kinds
};

struct StudyResult {
  StudyDesign design;
  std::vector<ProblemRecord> records;
  KindStats sdf;
  KindStats usdf;
  std::size_t both_failed = 0;
  std::size_t jointly_valid = 0;
  double failure_ratio = 0.0;    // USDF / SDF; +inf when only USDF fails
  double iteration_ratio = 0.0;
  double cost_ratio = 0.0;
  int env_resamples = 0;
  double runtime_s = 0.0;  // wall clock; not written to deterministic outputs
};

/// Aggregates per the inclusion rules from per-problem records.
void aggregate(StudyResult& result);

/// Solves every problem under both field kinds (OpenMP over problems).
StudyResult run_study(const StudyDesign& design);

void write_study_csv(std::ostream& os, const StudyResult& r);
void write_study_json(std::ostream& os, const StudyResult& r);
/// Side-by-side USDF/SDF text report for one or more cases.
void write_study_report(std::ostream& os, const std::vector<StudyResult>& results);

struct RefitStudyDesign {
  StudyCase study_case = StudyCase::kWholebody;  // robot, grid and workspace come from the case defaults
  int n_problems = 60;
  std::uint64_t seed = 1;
  double progress_min = 0.2;  // re-plan time as a fraction of the initial plan
  double progress_max = 0.6;
  double shift = 0.2;  // m, planar displacement of the obstacle at re-plan time
  double velocity_headroom = 2.0;
  int max_retries = 1000;

  void validate() const;
};

struct RefitProblemRecord {
  int index = 0;
  double replan_time = 0.0;
  int n_states = 0;
  int refit_iterations = 0;
  int straight_iterations = 0;
  bool refit_collision_free = false;
  bool straight_collision_free = false;
  double refit_cost = 0.0;
  double straight_cost = 0.0;
};

struct RefitStudyResult {
  RefitStudyDesign design;
  std::vector<RefitProblemRecord> records;
  MeanStd refit_iterations;
  MeanStd straight_iterations;
  double iteration_ratio = 0.0;  // refit / straight-line
};

/// Seeded re-plan perturbations: plan between two states around one cuboid,
/// stop part way, shift the cuboid, then re-plan from the interpolated state
/// once from the refitted old plan and once from a straight line. Both solves
/// use the re-planning profile on the same graph.
RefitStudyResult run_refit_study(const RefitStudyDesign& design);
void write_refit_csv(std::ostream& os, const RefitStudyResult& r);

struct FieldBenchConfig {
  double extent = 3.2;  // m, cube edge
  std::vector<double> resolutions{0.1, 0.05, 0.025};
  int repetitions = 10;
  int n_cuboids = 20;
  std::uint64_t seed = 1;
  bool serial = false;  // use the serial EDT backend

  void validate() const;
};

struct FieldBenchCell {
  double resolution = 0.0;
  BuildBenchResult result;
};

/// Random-cuboid scene per resolution; `repetitions` builds per kind.
std::vector<FieldBenchCell> run_field_bench(const FieldBenchConfig& cfg);
void write_field_bench_csv(std::ostream& os, const std::vector<FieldBenchCell>& cells);
void write_field_bench_table(std::ostream& os, const std::vector<FieldBenchCell>& cells);

}  // namespace dfplan
