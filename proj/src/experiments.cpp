#include "dfplan/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dfplan/distance_field.hpp"
#include "dfplan/replanner.hpp"

namespace dfplan {

const char* to_string(StudyCase c) {
  switch (c) {
    case StudyCase::kNav2d: return "nav2d";
    case StudyCase::kArm: return "arm";
    case StudyCase::kWholebody: return "wholebody";
  }
  return "unknown";
}

StudyCase study_case_from_string(const std::string& s) {
  if (s == "nav2d") return StudyCase::kNav2d;
  if (s == "arm") return StudyCase::kArm;
  if (s == "wholebody") return StudyCase::kWholebody;
  throw std::invalid_argument("unknown study case '" + s + "' (expected nav2d|arm|wholebody)");
}

StudyDesign StudyDesign::defaults(StudyCase c) {
  StudyDesign d;
  d.study_case = c;
  d.params.lm = study_profile();
  d.params.qc = 1.0;
  d.params.n_interp = 3;
  d.params.eps = 0.2;
  d.params.obs_sigma = 0.1;
  switch (c) {
    case StudyCase::kNav2d:
      d.grid = GridSpec{Vec3(-2.5, -2.5, -0.025), 0.05, {100, 100, 1}};
      d.workspace_lo = Vec3(-2.0, -2.0, 0.0);
      d.workspace_hi = Vec3(2.0, 2.0, 0.0);
      d.params.dt = 0.5;
      break;
    case StudyCase::kArm:
      d.grid = GridSpec{Vec3(-1.2, -1.2, -0.1), 0.05, {48, 48, 40}};
      d.workspace_lo = Vec3(-1.0, -1.0, 0.0);
      d.workspace_hi = Vec3(1.0, 1.0, 1.6);
      d.params.dt = 0.2;
      break;
    case StudyCase::kWholebody:
      d.grid = GridSpec{Vec3(-2.0, -2.0, -0.1), 0.05, {80, 80, 36}};
      d.workspace_lo = Vec3(-1.5, -1.5, 0.0);
      d.workspace_hi = Vec3(1.5, 1.5, 1.6);
      d.params.dt = 0.3;
      break;
  }
  return d;
}

void StudyDesign::validate() const {
  if (n_states < 2) throw std::invalid_argument("study: n_states must be >= 2");
  if (n_envs < 1) throw std::invalid_argument("study: n_envs must be >= 1");
  if (!(size_min >= 0.0) || !(size_max >= size_min)) throw std::invalid_argument("study: bad cuboid size range");
  if (!(workspace_hi.array() >= workspace_lo.array()).all()) throw std::invalid_argument("study: bad workspace bounds");
  if (n_support < 2) throw std::invalid_argument("study: n_support must be >= 2");
  if (!(check_step > 0.0)) throw std::invalid_argument("study: check_step must be > 0");
  grid.validate();
  params.validate();
}

namespace {

RobotModel study_model(StudyCase c) {
  switch (c) {
    case StudyCase::kNav2d: return make_nav2d();
    case StudyCase::kArm: return make_arm7();
    case StudyCase::kWholebody: return make_wholebody8();
  }
  throw std::invalid_argument("study: bad case");
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
}

VecX sample_state(const StudyDesign& d, const RobotModel& m, std::mt19937_64& rng) {
  const VecX lo = m.lower(), hi = m.upper();
  VecX q(m.dof());
  for (int j = 0; j < m.dof(); ++j) q[j] = uniform(rng, lo[j], hi[j]);
  // Positional DoF are drawn inside the workspace instead of the wide limits.
  if (d.study_case == StudyCase::kNav2d || m.base_dof() > 0)
    for (int j = 0; j < 2; ++j) q[j] = uniform(rng, d.workspace_lo[j], d.workspace_hi[j]);
  return q;
}

bool state_admissible(const StudyDesign& d, const RobotModel& m, const VecX& q) {
  if (d.study_case == StudyCase::kNav2d) return true;
  // Every link sphere clear of the floor (z = 0); base spheres rest on it.
  const auto centers = forward_kinematics(m, q);
  for (std::size_t s = 0; s < centers.size(); ++s)
    if (m.spheres[s].frame > 0 && centers[s].z() - m.spheres[s].radius <= 0.0) return false;
  return true;
}

Cuboid sample_cuboid(const StudyDesign& d, std::mt19937_64& rng) {
  Cuboid c;
  for (int k = 0; k < 3; ++k) c.center[k] = uniform(rng, d.workspace_lo[k], d.workspace_hi[k]);
  for (int k = 0; k < 3; ++k) c.half_extents[k] = 0.5 * uniform(rng, d.size_min, d.size_max);
  return c;
}

double min_clearance(const RobotModel& m, const VecX& q, const DistanceField& f) {
  const auto centers = forward_kinematics(m, q);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < centers.size(); ++s) best = std::min(best, f.distance(centers[s]) - m.spheres[s].radius);
  return best;
}

SolveRecord solve(const StudyDesign& d, const RobotModel& m, const VecX& a, const VecX& b,
                  const std::shared_ptr<const DistanceField>& field, const DistanceField& truth) {
  const FactorGraph g = build_graph(m, a, b, d.params, field, d.n_support);
  const OptimizeResult r = optimize_lm(g, init_straight_line(a, b, d.params.dt, d.n_support), d.params.lm);
  const ClearanceReport c = trajectory_clearance(m, r.trajectory, truth, g.qc(), d.check_step, r.trajectory.t0);
  SolveRecord out;
  out.collision_free = c.collision_free;
  out.iterations = r.iterations;
  out.final_cost = r.final_error;
  out.min_clearance = c.min_clearance;
  out.reason = r.reason;
  return out;
}

}  // namespace

BinaryMask environment_mask(const StudyDesign& d, const Cuboid& env) {
  OccupancyGrid g(d.grid, {}, -2.0);
  g.rasterize_cuboid(env, RasterMode::kOccupied);
  return g.occupancy_snapshot();
}

ProblemSet generate_problems(const StudyDesign& d) {
  d.validate();
  ProblemSet set;
  set.model = study_model(d.study_case);
  std::mt19937_64 rng(d.seed);
  for (int i = 0; i < d.n_states; ++i) {
    int tries = 0;
    VecX q;
    do {
      if (++tries > d.max_retries) throw std::runtime_error("study: cannot sample an admissible robot state");
      q = sample_state(d, set.model, rng);
    } while (!state_admissible(d, set.model, q));
    set.states.push_back(q);
  }
  for (int e = 0; e < d.n_envs; ++e) {
    for (int tries = 0;; ++tries) {
      if (tries > d.max_retries) throw std::runtime_error("study: cannot place a cuboid clear of all states");
      Cuboid c = sample_cuboid(d, rng);
      if (d.study_case == StudyCase::kNav2d) c.center.z() = 0.0;
      const DistanceField f = compute_sdf(environment_mask(d, c));
      bool clear = true;
      for (const auto& q : set.states) clear = clear && min_clearance(set.model, q, f) > 0.0;
      if (clear) {
        set.envs.push_back(c);
        break;
      }
      ++set.env_resamples;
    }
  }
  int pair = 0;
  for (int a = 0; a < d.n_states; ++a)
    for (int b = a + 1; b < d.n_states; ++b, ++pair)
      for (int e = 0; e < d.n_envs; ++e)
        set.problems.push_back({pair * d.n_envs + e, pair, e, a, b});
  return set;
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  m.n = v.size();
  if (v.empty()) return m;
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return m;
}

namespace {

double ratio(double num, double den) {
  if (den == 0.0) return num == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace

void aggregate(StudyResult& r) {
  const std::size_t total = r.records.size();
  std::size_t both = 0, either = 0, f_sdf = 0, f_usdf = 0;
  std::vector<double> it_sdf, it_usdf, c_sdf, c_usdf;
  for (const auto& rec : r.records) {
    const bool fs = !rec.sdf.collision_free, fu = !rec.usdf.collision_free;
    both += fs && fu;
    either += fs || fu;
    f_sdf += fs && !fu;
    f_usdf += fu && !fs;
    it_sdf.push_back(rec.sdf.iterations);
    it_usdf.push_back(rec.usdf.iterations);
    if (!fs && !fu) {
      c_sdf.push_back(rec.sdf.final_cost);
      c_usdf.push_back(rec.usdf.final_cost);
    }
  }
  r.both_failed = both;
  r.jointly_valid = total - either;
  const double denom = static_cast<double>(total - both);
  r.sdf.failures = f_sdf;
  r.usdf.failures = f_usdf;
  r.sdf.failure_rate = denom > 0 ? f_sdf / denom : 0.0;
  r.usdf.failure_rate = denom > 0 ? f_usdf / denom : 0.0;
  // Excluding every problem that failed under either kind leaves no failures.
  r.sdf.failure_rate_literal = 0.0;
  r.usdf.failure_rate_literal = 0.0;
  r.sdf.iterations = mean_std(it_sdf);
  r.usdf.iterations = mean_std(it_usdf);
  r.sdf.valid_cost = mean_std(c_sdf);
  r.usdf.valid_cost = mean_std(c_usdf);
  r.failure_ratio = ratio(r.usdf.failure_rate, r.sdf.failure_rate);
  r.iteration_ratio = ratio(r.usdf.iterations.mean, r.sdf.iterations.mean);
  r.cost_ratio = ratio(r.usdf.valid_cost.mean, r.sdf.valid_cost.mean);
}

StudyResult run_study(const StudyDesign& d) {
  Stopwatch sw;
  const ProblemSet set = generate_problems(d);
  StudyResult result;
  result.design = d;
  result.env_resamples = set.env_resamples;
  result.records.resize(set.problems.size());
  const int pairs = static_cast<int>(d.pair_count());
  for (int e = 0; e < d.n_envs; ++e) {
    const BinaryMask mask = environment_mask(d, set.envs[e]);
    const auto sdf = std::make_shared<const DistanceField>(compute_sdf(mask));
    const auto usdf = std::make_shared<const DistanceField>(compute_usdf(mask));
#pragma omp parallel for schedule(dynamic)
    for (int p = 0; p < pairs; ++p) {
      const StudyProblem& prob = set.problems[static_cast<std::size_t>(p) * d.n_envs + e];
      ProblemRecord& rec = result.records[prob.index];
      rec.problem = prob;
      const VecX& a = set.states[prob.a];
      const VecX& b = set.states[prob.b];
      rec.sdf = solve(d, set.model, a, b, sdf, *sdf);
      rec.usdf = solve(d, set.model, a, b, usdf, *sdf);
    }
  }
  aggregate(result);
  result.runtime_s = sw.elapsed_ms() / 1000.0;
  return result;
}

void write_study_csv(std::ostream& os, const StudyResult& r) {
  os << "index,pair,env,a,b";
  for (const char* k : {"sdf", "usdf"})
    os << ',' << k << "_collision_free," << k << "_iterations," << k << "_cost," << k << "_min_clearance," << k
       << "_stop";
  os << ",both_failed,counted_excl_both,counted_excl_either\n";
  os << std::setprecision(17);
  for (const auto& rec : r.records) {
    const auto& p = rec.problem;
    os << p.index << ',' << p.pair << ',' << p.env << ',' << p.a << ',' << p.b;
    for (const SolveRecord* s : {&rec.sdf, &rec.usdf})
      os << ',' << (s->collision_free ? 1 : 0) << ',' << s->iterations << ',' << s->final_cost << ','
         << s->min_clearance << ',' << to_string(s->reason);
    const bool fs = !rec.sdf.collision_free, fu = !rec.usdf.collision_free;
    os << ',' << (fs && fu ? 1 : 0) << ',' << (fs && fu ? 0 : 1) << ',' << (fs || fu ? 0 : 1) << '\n';
  }
}

namespace {

nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json("inf");
}

nlohmann::ordered_json stat_json(const MeanStd& m) {
  return {{"mean", number(m.mean)}, {"std", number(m.std)}, {"n", m.n}};
}

nlohmann::ordered_json kind_json(const KindStats& k) {
  nlohmann::ordered_json j;
  j["failure_rate"] = k.failure_rate;
  j["failure_rate_literal"] = k.failure_rate_literal;
  j["failures"] = k.failures;
  j["iterations"] = stat_json(k.iterations);
  j["valid_cost"] = stat_json(k.valid_cost);
  return j;
}

}  // namespace

void write_study_json(std::ostream& os, const StudyResult& r) {
  const StudyDesign& d = r.design;
  nlohmann::ordered_json j;
  j["case"] = to_string(d.study_case);
  j["seed"] = d.seed;
  j["n_states"] = d.n_states;
  j["n_envs"] = d.n_envs;
  j["pairs"] = d.pair_count();
  j["problems"] = r.records.size();
  j["n_support"] = d.n_support;
  j["dt"] = d.params.dt;
  j["eps"] = d.params.eps;
  j["obs_sigma"] = d.params.obs_sigma;
  j["lm"] = {{"lambda_init", d.params.lm.lambda_init},
             {"rel_decrease_tol", d.params.lm.rel_decrease_tol},
             {"max_iters", d.params.lm.max_iters}};
  j["env_resamples"] = r.env_resamples;
  j["both_failed"] = r.both_failed;
  j["jointly_valid"] = r.jointly_valid;
  j["sdf"] = kind_json(r.sdf);
  j["usdf"] = kind_json(r.usdf);
  j["relative"] = {{"failure_rate", number(r.failure_ratio)},
                   {"iterations", number(r.iteration_ratio)},
                   {"valid_cost", number(r.cost_ratio)}};
  os << j.dump(2) << '\n';
}

namespace {

std::string fmt(double v, int prec = 3) {
  if (std::isnan(v)) return "n/a";
  if (std::isinf(v)) return "inf";
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

std::string pm(const MeanStd& m) { return fmt(m.mean) + " ± " + fmt(m.std); }

}  // namespace

void write_study_report(std::ostream& os, const std::vector<StudyResult>& results) {
  auto row = [&](const std::string& metric, const std::string& c, const std::string& u, const std::string& s,
                 const std::string& rel) {
    os << std::left << std::setw(26) << metric << std::setw(12) << c << std::setw(22) << u << std::setw(22) << s
       << rel << '\n';
  };
  os << "Comparison between SDF and USDF for collision avoidance\n\n";
  row("", "", "USDF", "SDF", "USDF/SDF");
  os << std::string(92, '-') << '\n';
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    row(i == 0 ? "Failure rate (%)" : "", to_string(r.design.study_case), fmt(100 * r.usdf.failure_rate),
        fmt(100 * r.sdf.failure_rate), fmt(r.failure_ratio));
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    row(i == 0 ? "Iterations (mean ± sd)" : "", to_string(r.design.study_case), pm(r.usdf.iterations),
        pm(r.sdf.iterations), fmt(r.iteration_ratio));
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    row(i == 0 ? "Valid cost (mean ± sd)" : "", to_string(r.design.study_case), pm(r.usdf.valid_cost),
        pm(r.sdf.valid_cost), fmt(r.cost_ratio));
  }
  os << '\n';
  for (const auto& r : results)
    os << to_string(r.design.study_case) << ": " << r.records.size() << " problems (" << r.design.pair_count()
       << " pairs x " << r.design.n_envs << " environments), " << r.both_failed << " failed under both kinds, "
       << r.jointly_valid << " collision-free under both\n";
  os << "Failure rates exclude problems that failed under both kinds.\n";
}

void RefitStudyDesign::validate() const {
  if (n_problems < 1) throw std::invalid_argument("refit study: n_problems must be >= 1");
  if (!(progress_min > 0.0) || !(progress_max >= progress_min) || !(progress_max < 1.0))
    throw std::invalid_argument("refit study: progress range must lie in (0, 1)");
  if (!(shift >= 0.0)) throw std::invalid_argument("refit study: shift must be >= 0");
  if (!(velocity_headroom >= 1.0)) throw std::invalid_argument("refit study: velocity_headroom must be >= 1");
}

RefitStudyResult run_refit_study(const RefitStudyDesign& rd) {
  rd.validate();
  StudyDesign d = StudyDesign::defaults(rd.study_case);
  d.params.lm = replan_profile();
  const RobotModel m = study_model(rd.study_case);
  const MatX qc = d.params.qc_matrix(m.dof());
  const VecX vplan = m.vmax() / rd.velocity_headroom;
  std::mt19937_64 rng(rd.seed);
  const auto field_of = [&](const Cuboid& c) {
    return std::make_shared<const DistanceField>(compute_sdf(environment_mask(d, c)));
  };
  const auto clear = [&](const DistanceField& f, std::initializer_list<const VecX*> qs) {
    for (const VecX* q : qs)
      if (min_clearance(m, *q, f) <= 0.0) return false;
    return true;
  };
  const auto admissible_state = [&] {
    for (int tries = 0; tries < rd.max_retries; ++tries) {
      VecX q = sample_state(d, m, rng);
      if (state_admissible(d, m, q)) return q;
    }
    throw std::runtime_error("refit study: cannot sample an admissible robot state");
  };

  RefitStudyResult out;
  out.design = rd;
  for (int i = 0; i < rd.n_problems; ++i) {
    const VecX a = admissible_state(), b = admissible_state();
    std::shared_ptr<const DistanceField> before;
    Cuboid box;
    for (int tries = 0;; ++tries) {
      if (tries > rd.max_retries) throw std::runtime_error("refit study: cannot place a cuboid clear of the states");
      box = sample_cuboid(d, rng);
      if (d.study_case == StudyCase::kNav2d) box.center.z() = 0.0;
      before = field_of(box);
      if (clear(*before, {&a, &b})) break;
    }
    const HorizonEstimate h0 = estimate_parameters(a, b, vplan, d.params.dt);
    const FactorGraph g0 = build_graph(m, a, b, d.params, before, h0.n_states);
    const Trajectory plan = optimize_lm(g0, init_straight_line(a, b, h0.dt, h0.n_states), d.params.lm).trajectory;

    const double tc = plan.t0 + uniform(rng, rd.progress_min, rd.progress_max) * plan.duration();
    const SupportState xc = gp_interpolate(plan, tc, qc);
    // Rigid planar shift of the obstacle, redrawn until start and goal stay clear.
    std::shared_ptr<const DistanceField> after;
    for (int tries = 0;; ++tries) {
      if (tries > rd.max_retries) throw std::runtime_error("refit study: cannot shift the cuboid clear of the states");
      const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      Cuboid moved = box;
      moved.center += rd.shift * Vec3(std::cos(angle), std::sin(angle), 0.0);
      after = field_of(moved);
      if (clear(*after, {&xc.position, &b})) break;
    }

    const HorizonEstimate h = estimate_parameters(xc.position, b, vplan, d.params.dt);
    const SupportState goal{b, VecX::Zero(b.size())};
    const FactorGraph g = build_graph(m, xc, goal, d.params, after, h.n_states);
    const OptimizeResult refit = optimize_lm(g, refit_trajectory(plan, xc, h.n_states, h.dt, qc, tc), d.params.lm);
    const OptimizeResult straight =
        optimize_lm(g, init_straight_line(xc.position, b, h.dt, h.n_states, tc), d.params.lm);

    RefitProblemRecord r;
    r.index = i;
    r.replan_time = tc;
    r.n_states = h.n_states;
    r.refit_iterations = refit.iterations;
    r.straight_iterations = straight.iterations;
    r.refit_cost = refit.final_error;
    r.straight_cost = straight.final_error;
    r.refit_collision_free = trajectory_clearance(m, refit.trajectory, *after, qc, d.check_step, tc).collision_free;
    r.straight_collision_free =
        trajectory_clearance(m, straight.trajectory, *after, qc, d.check_step, tc).collision_free;
    out.records.push_back(r);
  }
  std::vector<double> it_refit, it_straight;
  for (const auto& r : out.records) {
    it_refit.push_back(r.refit_iterations);
    it_straight.push_back(r.straight_iterations);
  }
  out.refit_iterations = mean_std(it_refit);
  out.straight_iterations = mean_std(it_straight);
  out.iteration_ratio = ratio(out.refit_iterations.mean, out.straight_iterations.mean);
  return out;
}

void write_refit_csv(std::ostream& os, const RefitStudyResult& r) {
  os << "index,replan_time,n_states,refit_iterations,straight_iterations,refit_collision_free,"
        "straight_collision_free,refit_cost,straight_cost\n";
  os << std::setprecision(17);
  for (const auto& p : r.records)
    os << p.index << ',' << p.replan_time << ',' << p.n_states << ',' << p.refit_iterations << ','
       << p.straight_iterations << ',' << (p.refit_collision_free ? 1 : 0) << ','
       << (p.straight_collision_free ? 1 : 0) << ',' << p.refit_cost << ',' << p.straight_cost << '\n';
}

void FieldBenchConfig::validate() const {
  if (!(extent > 0.0)) throw std::invalid_argument("bench: extent must be > 0");
  if (resolutions.empty()) throw std::invalid_argument("bench: no resolutions");
  for (double r : resolutions)
    if (!(r > 0.0)) throw std::invalid_argument("bench: resolutions must be > 0");
  if (repetitions < 1) throw std::invalid_argument("bench: repetitions must be >= 1");
  if (n_cuboids < 0) throw std::invalid_argument("bench: n_cuboids must be >= 0");
}

std::vector<FieldBenchCell> run_field_bench(const FieldBenchConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::vector<Cuboid> scene;
  for (int k = 0; k < cfg.n_cuboids; ++k) {
    Cuboid c;
    for (int a = 0; a < 3; ++a) c.center[a] = uniform(rng, 0.0, cfg.extent);
    for (int a = 0; a < 3; ++a) c.half_extents[a] = 0.5 * uniform(rng, 0.0, 1.0);
    scene.push_back(c);
  }
  BuildOptions opts;
  opts.backend = cfg.serial ? edt::Backend::kSerial : edt::Backend::kParallel;
  std::vector<FieldBenchCell> cells;
  for (double res : cfg.resolutions) {
    const int n = std::max(1, static_cast<int>(std::lround(cfg.extent / res)));
    OccupancyGrid g(GridSpec{Vec3::Zero(), res, {n, n, n}}, {}, -2.0);
    for (const auto& c : scene) g.rasterize_cuboid(c, RasterMode::kOccupied);
    const std::vector<BinaryMask> masks(cfg.repetitions, g.occupancy_snapshot());
    cells.push_back({res, benchmark_build(masks, true, true, opts)});
  }
  return cells;
}

void write_field_bench_csv(std::ostream& os, const std::vector<FieldBenchCell>& cells) {
  os << "resolution,nx,ny,nz,voxels,reps,unsigned_mean_ms,unsigned_std_ms,signed_mean_ms,signed_std_ms,ratio\n";
  os << std::setprecision(9);
  for (const auto& c : cells) {
    const auto& s = c.result.spec;
    os << c.resolution << ',' << s.dims[0] << ',' << s.dims[1] << ',' << s.dims[2] << ',' << s.size() << ','
       << c.result.unsigned_ms.samples << ',' << c.result.unsigned_ms.mean_ms << ',' << c.result.unsigned_ms.std_ms
       << ',' << c.result.signed_ms.mean_ms << ',' << c.result.signed_ms.std_ms << ',' << c.result.ratio << '\n';
  }
}

void write_field_bench_table(std::ostream& os, const std::vector<FieldBenchCell>& cells) {
  os << "Time to compute distance fields (ms, mean ± sd)\n\n";
  os << std::left << std::setw(12) << "resolution" << std::setw(16) << "grid" << std::setw(22) << "USDF"
     << std::setw(22) << "SDF" << "SDF/USDF\n";
  os << std::string(80, '-') << '\n';
  for (const auto& c : cells) {
    const auto& s = c.result.spec;
    std::ostringstream grid;
    grid << s.dims[0] << 'x' << s.dims[1] << 'x' << s.dims[2];
    os << std::left << std::setw(12) << fmt(c.resolution) << std::setw(16) << grid.str() << std::setw(22)
       << (fmt(c.result.unsigned_ms.mean_ms, 4) + " ± " + fmt(c.result.unsigned_ms.std_ms, 3)) << std::setw(22)
       << (fmt(c.result.signed_ms.mean_ms, 4) + " ± " + fmt(c.result.signed_ms.std_ms, 3)) << fmt(c.result.ratio)
       << '\n';
  }
}

}  // namespace dfplan
