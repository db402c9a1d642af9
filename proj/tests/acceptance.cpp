// Acceptance suite: one PASS/FAIL line per criterion; the exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "dfplan/distance_field.hpp"
#include "dfplan/experiments.hpp"
#include "dfplan/replanner.hpp"
#include "dfplan/scenario.hpp"
#include "dfplan/world_sim.hpp"
#include "oracles.hpp"

using namespace dfplan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream s;
  s << is.rdbuf();
  return s.str();
}

Scenario floor_pickup() { return load_scenario(std::string(DFPLAN_SOURCE_DIR) + "/configs/floor_pickup.yaml"); }

// 1. Exact EDT against the brute-force oracle.
Outcome edt_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const GridSpec s{Vec3::Zero(), 1.0, {16, 16, 16}};
  std::uniform_real_distribution<double> density(0.002, 0.5);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    BinaryMask m = oracle::random_mask(s, density(rng), rng);
    if (m.count() == 0) m.set(trial % 16, 7, 3, true);
    const auto ref = oracle::brute_squared_edt(m);
    std::vector<double> sq(s.size());
    edt::squared_edt(m.bits, s.dims, sq, edt::Backend::kSerial);
    std::vector<double> sq_par(s.size());
    edt::squared_edt(m.bits, s.dims, sq_par, edt::Backend::kParallel);
    const DistanceField f = compute_usdf(m);
    for (std::size_t n = 0; n < s.size(); ++n) {
      const double r = static_cast<double>(ref[n]);
      // The metric field at unit resolution must be the correctly rounded root.
      mismatches += sq[n] != r || sq_par[n] != r || f.value(n) != std::sqrt(r) ||
                    std::llround(f.value(n) * f.value(n)) != ref[n];
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60.0,
          "100 masks 16^3, " + std::to_string(mismatches) + " mismatching voxels, " + fmt(secs, 3) + " s"};
}

// 2. SDF as the difference of two unsigned transforms.
Outcome sdf_identity() {
  std::mt19937_64 rng(202);
  const GridSpec s{Vec3(-0.4, -0.4, -0.4), 0.05, {16, 16, 16}};
  std::uniform_real_distribution<double> density(0.01, 0.9);
  std::size_t diff = 0, sign = 0, checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const BinaryMask m = oracle::random_mask(s, density(rng), rng);
    const DistanceField sdf = compute_sdf(m);
    const DistanceField pos = compute_usdf(m), neg = compute_usdf(m.inverted());
    const bool both = m.count() > 0 && m.count() < m.bits.size();
    for (std::size_t n = 0; n < s.size(); ++n) {
      diff += sdf.value(n) != pos.value(n) - neg.value(n);
      if (both) {
        sign += (sdf.value(n) < 0.0) != m[n] || sdf.value(n) == 0.0;
        ++checked;
      }
    }
  }
  return {diff == 0 && sign == 0 && checked > 0, "100 masks 16^3, " + std::to_string(diff) +
                                                     " identity mismatches, " + std::to_string(sign) +
                                                     " sign mismatches over " + std::to_string(checked) + " voxels"};
}

// 3. Signed build time over unsigned build time on 128³ masks.
Outcome signed_cost_ratio() {
  std::mt19937_64 rng(303);
  const double res = 0.025;
  const GridSpec s{Vec3::Zero(), res, {128, 128, 128}};
  std::uniform_real_distribution<double> pos(0.0, 128 * res), half(0.05, 0.5);
  std::vector<BinaryMask> masks;
  for (int k = 0; k < 5; ++k) {
    OccupancyGrid g(s, {}, -2.0);
    for (int c = 0; c < 20; ++c)
      g.rasterize_cuboid(Cuboid{Vec3(pos(rng), pos(rng), pos(rng)), Vec3(half(rng), half(rng), half(rng))},
                         RasterMode::kOccupied);
    masks.push_back(g.occupancy_snapshot());
  }
  const BuildBenchResult r = benchmark_build(masks, true, true);
  return {r.ratio >= 1.5 && r.ratio <= 3.5, "USDF " + fmt(r.unsigned_ms.mean_ms) + " ms, SDF " +
                                                fmt(r.signed_ms.mean_ms) + " ms, ratio " + fmt(r.ratio, 3) +
                                                " (required [1.5, 3.5])"};
}

std::vector<Index3> cells(const RobotModel& m, const VecX& q, const GridSpec& s) {
  std::vector<Index3> out;
  for (const auto& c : forward_kinematics(m, q)) out.push_back(s.voxel_of(c - Vec3::Constant(0.5 * s.resolution)));
  return out;
}

std::shared_ptr<const DistanceField> clutter_field(std::mt19937_64& rng) {
  const GridSpec s{Vec3(-1.2, -1.2, -0.2), 0.06, {40, 40, 30}};
  OccupancyGrid g(s, {}, -2.0);
  std::uniform_real_distribution<double> p(-0.8, 0.8), e(0.05, 0.3);
  for (int k = 0; k < 4; ++k)
    g.rasterize_cuboid({Vec3(p(rng), p(rng), 0.5 + 0.5 * p(rng)), Vec3(e(rng), e(rng), e(rng))},
                       RasterMode::kOccupied);
  return std::make_shared<const DistanceField>(compute_sdf(g.occupancy_snapshot()));
}

// 4. Analytic Jacobians against central finite differences.
Outcome jacobian_suite() {
  std::mt19937_64 rng(404);
  int sphere_samples = 0, obstacle_samples = 0, graph_samples = 0;
  double sphere_worst = 0.0, obstacle_worst = 0.0, graph_worst = 0.0;

  for (const auto& name : builtin_model_names()) {
    const RobotModel m = builtin_model(name);
    for (int t = 0; t < 1000; ++t) {
      const VecX q = oracle::random_config(m, rng);
      const auto jac = sphere_jacobians(m, q);
      const double h = 1e-6;
      for (std::size_t s = 0; s < jac.size(); ++s) {
        MatX fd(3, m.dof());
        for (int c = 0; c < m.dof(); ++c) {
          VecX a = q, b = q;
          a[c] += h;
          b[c] -= h;
          fd.col(c) = (forward_kinematics(m, a)[s] - forward_kinematics(m, b)[s]) / (2 * h);
        }
        sphere_worst = std::max(sphere_worst, oracle::rel_err(jac[s], fd));
      }
      ++sphere_samples;
    }
  }

  const auto field = clutter_field(rng);
  const GridSpec& gs = field->spec();
  const double eps = 0.3, sigma = 0.05, h = 1e-7;
  for (const std::string name : {"arm7", "wholebody8"}) {
    RobotModel m = builtin_model(name);
    if (m.base_dof()) m.base_lower = m.base_upper = Eigen::Vector3d::Zero();
    int here = 0;
    for (int t = 0; t < 20000 && here < 600; ++t) {
      VecX q = oracle::random_config(m, rng);
      if (m.base_dof()) q.head<2>() = Eigen::Vector2d(0.6 * std::uniform_real_distribution<double>(-1, 1)(rng), 0.0);
      const ObstacleEval ev = obstacle_residual(m, q, *field, eps, sigma);
      if (ev.clamped || ev.residual.isZero()) continue;
      if (((ev.clearance.array() - eps).abs() < 1e-5).any()) continue;
      const auto c0 = cells(m, q, gs);
      MatX fd(ev.residual.size(), m.dof());
      bool smooth = true;
      for (int j = 0; j < m.dof() && smooth; ++j) {
        VecX a = q, b = q;
        a[j] += h;
        b[j] -= h;
        if (cells(m, a, gs) != c0 || cells(m, b, gs) != c0) smooth = false;
        fd.col(j) = (obstacle_residual(m, a, *field, eps, sigma, false).residual -
                     obstacle_residual(m, b, *field, eps, sigma, false).residual) / (2 * h);
      }
      if (!smooth) continue;
      obstacle_worst = std::max(obstacle_worst, oracle::rel_err(ev.jacobian, fd));
      ++obstacle_samples;
      ++here;
    }
  }

  const RobotModel arm = builtin_model("arm7");
  PlannerParams p;
  p.dt = 0.2;
  p.eps = 0.3;
  p.obs_sigma = 0.05;
  p.n_interp = 3;
  const int n = 5, w = 2 * arm.dof();
  for (int trial = 0; trial < 400 && graph_samples < 20; ++trial) {
    const VecX a = oracle::random_config(arm, rng), b = oracle::random_config(arm, rng);
    const FactorGraph g = build_graph(arm, a, b, p, field, n);
    const Trajectory t = init_straight_line(a, b, p.dt, n);
    const MatX j = g.stacked_jacobian(t);
    const VecX r0 = g.stacked_residual(t);
    const Eigen::Index obstacle_rows = 2 * w + (n - 1) * w;
    if (r0.tail(r0.size() - obstacle_rows).isZero()) continue;
    MatX fd(j.rows(), j.cols());
    bool smooth = true;
    for (Eigen::Index c = 0; c < j.cols() && smooth; ++c) {
      const int st = static_cast<int>(c / w), off = static_cast<int>(c % w);
      Trajectory ta = t, tb = t;
      (off < arm.dof() ? ta.states[st].position[off] : ta.states[st].velocity[off - arm.dof()]) += h;
      (off < arm.dof() ? tb.states[st].position[off] : tb.states[st].velocity[off - arm.dof()]) -= h;
      const VecX ra = g.stacked_residual(ta), rb = g.stacked_residual(tb);
      for (Eigen::Index i = obstacle_rows; i < r0.size(); ++i)
        if ((ra[i] == 0.0) != (r0[i] == 0.0) || (rb[i] == 0.0) != (r0[i] == 0.0)) smooth = false;
      for (int s2 = 0; s2 < n && smooth; ++s2)
        for (int k = 0; k <= (s2 + 1 < n ? p.n_interp : 0) && smooth; ++k) {
          const auto c0 = cells(arm, g.site_configuration(t, s2, k), gs);
          if (cells(arm, g.site_configuration(ta, s2, k), gs) != c0 ||
              cells(arm, g.site_configuration(tb, s2, k), gs) != c0)
            smooth = false;
        }
      fd.col(c) = (ra - rb) / (2 * h);
    }
    if (!smooth) continue;
    graph_worst = std::max(graph_worst, oracle::rel_err(j, fd));
    ++graph_samples;
  }

  const int total = sphere_samples + obstacle_samples + graph_samples;
  const bool pass = sphere_worst < 1e-6 && obstacle_worst < 1e-4 && graph_worst < 1e-4 && total >= 1000 &&
                    obstacle_samples >= 1000 && graph_samples > 0;
  return {pass, std::to_string(sphere_samples) + " kinematic samples (worst " + fmt(sphere_worst, 2) + "), " +
                    std::to_string(obstacle_samples) + " obstacle-factor samples (worst " + fmt(obstacle_worst, 2) +
                    "), " + std::to_string(graph_samples) + " stacked graphs (worst " + fmt(graph_worst, 2) + ")"};
}

// 5. GP interpolation identities.
Outcome gp_interpolation() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(-2, 2);
  std::size_t endpoint_bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dof = 1 + trial % 8, n = 2 + trial % 9;
    Trajectory t;
    t.dt = 0.05 + 0.01 * trial;
    t.t0 = 0.5 * trial;
    for (int i = 0; i < n; ++i) {
      SupportState s;
      s.position = VecX::NullaryExpr(dof, [&] { return u(rng); });
      s.velocity = VecX::NullaryExpr(dof, [&] { return u(rng); });
      t.states.push_back(s);
    }
    const MatX qc = isotropic_qc(dof, 0.3 + trial);
    for (int i = 0; i < n; ++i) {
      const SupportState s = gp_interpolate(t, t.time_of(i), qc);
      endpoint_bad += s.position != t.states[i].position || s.velocity != t.states[i].velocity;
    }
  }
  VecX a(6), b(6);
  for (int k = 0; k < 6; ++k) {
    a[k] = u(rng);
    b[k] = u(rng);
  }
  const Trajectory line = init_straight_line(a, b, 0.3, 9, 1.0);
  const VecX v = (b - a) / line.duration();
  std::uniform_real_distribution<double> when(line.t0, line.end_time());
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const double tau = when(rng);
    const SupportState x = gp_interpolate(line, tau, isotropic_qc(6, 1.7));
    worst = std::max({worst, (x.position - (a + (tau - line.t0) * v)).cwiseAbs().maxCoeff(),
                      (x.velocity - v).cwiseAbs().maxCoeff()});
  }
  return {endpoint_bad == 0 && worst < 1e-9, std::to_string(endpoint_bad) +
                                                 " inexact support states, constant-velocity max error " +
                                                 fmt(worst, 2) + " at 100 interior times"};
}

// 6. Desk-scale SDF vs USDF study directionality.
Outcome study_directionality() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<StudyResult> rs;
  for (StudyCase c : {StudyCase::kNav2d, StudyCase::kArm, StudyCase::kWholebody}) {
    const StudyDesign d = StudyDesign::defaults(c);
    rs.push_back(run_study(d));
  }
  const double secs = seconds_since(t0);
  const StudyResult& nav = rs[0];
  const LmParams study = study_profile();
  bool defaults_ok = true;
  for (const auto& r : rs)
    defaults_ok = defaults_ok && r.design.n_states == 10 && r.design.n_envs == 50 && r.design.params.lm == study;
  const bool a = nav.usdf.failure_rate > nav.sdf.failure_rate && nav.usdf.failure_rate >= 2.0 * nav.sdf.failure_rate;
  bool b = true;
  std::string detail = "nav2d USDF " + fmt(100 * nav.usdf.failure_rate, 3) + "% vs SDF " +
                       fmt(100 * nav.sdf.failure_rate, 3) + "% (ratio " + fmt(nav.failure_ratio, 3) + ")";
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const auto& r = rs[i];
    b = b && r.sdf.failure_rate < 0.02 && r.usdf.failure_rate < 0.02 && r.iteration_ratio >= 0.8 &&
        r.iteration_ratio <= 1.2 && r.cost_ratio >= 0.9 && r.cost_ratio <= 1.1;
    detail += "; " + std::string(to_string(r.design.study_case)) + " fail " + fmt(100 * r.usdf.failure_rate, 3) +
              "%/" + fmt(100 * r.sdf.failure_rate, 3) + "%, iter ratio " + fmt(r.iteration_ratio, 3) +
              ", cost ratio " + fmt(r.cost_ratio, 3);
  }
  detail += "; " + fmt(secs, 3) + " s";
  return {defaults_ok && a && b && secs < 15 * 60, detail};
}

// 7. Warm-starting re-plans from the refitted old plan.
Outcome refit_advantage() {
  RefitStudyDesign d;
  d.n_problems = 60;
  const RefitStudyResult r = run_refit_study(d);
  return {r.records.size() >= 50 && r.iteration_ratio <= 0.9,
          std::to_string(r.records.size()) + " perturbations, refit " + fmt(r.refit_iterations.mean, 3) +
              " vs straight-line " + fmt(r.straight_iterations.mean, 3) + " iterations (ratio " +
              fmt(r.iteration_ratio, 3) + ", required <= 0.9)"};
}

// 8. Bundled moving-obstacle scenario end to end.
Outcome end_to_end() {
  const Scenario s = floor_pickup();
  WorldSim w1(s.world), w2(s.world);
  const ExecutionLog log = run_replanning(s.problem(), w1);
  const ExecutionLog again = run_replanning(s.problem(), w2);
  WorldSim truth(s.world);
  double exact = std::numeric_limits<double>::infinity();
  for (const auto& sample : log.samples) {
    const auto centers = forward_kinematics(s.robot, sample.position);
    const auto shapes = truth.shapes_at(sample.time);
    for (std::size_t k = 0; k < centers.size(); ++k)
      for (const auto& sh : shapes) exact = std::min(exact, oracle::shape_distance(sh, centers[k]) - s.robot.spheres[k].radius);
  }
  std::ostringstream j1, j2, c1, c2;
  write_log_json(j1, log);
  write_log_json(j2, again);
  write_log_csv(c1, log);
  write_log_csv(c2, again);
  const bool same = j1.str() == j2.str() && c1.str() == c2.str();
  const bool pass = log.reached() && log.replans() >= 1 && log.min_clearance > 0.0 && exact > 0.0 && same;
  return {pass, s.name + ": " + to_string(log.status) + ", " + std::to_string(log.replans()) +
                    " re-plans, min clearance " + fmt(log.min_clearance, 3) + " m on the field and " + fmt(exact, 3) +
                    " m exact over " + std::to_string(log.samples.size()) + " executed states, repeat run " +
                    (same ? "bit-identical" : "DIFFERENT")};
}

// 9. Monitor and re-plan wall-clock budget.
Outcome cycle_budget() {
  const Scenario s = floor_pickup();
  WorldSim world(s.world);
  const GridSpec& g = s.world.grid;
  const ExecutionLog log = run_replanning(s.problem(), world);
  std::vector<double> replans(log.replan_ms.begin() + std::min<std::size_t>(1, log.replan_ms.size()),
                              log.replan_ms.end());
  const double mon = median(log.monitor_ms), pl = median(replans);
  const double mon_max = log.monitor_ms.empty() ? 0 : *std::max_element(log.monitor_ms.begin(), log.monitor_ms.end());
  const double pl_max = replans.empty() ? 0 : *std::max_element(replans.begin(), replans.end());
  const bool setup = s.robot.name == "wholebody8" && g.resolution == 0.025 && g.dims == Index3{64, 64, 64};
  return {setup && !replans.empty() && mon < 4.0 && pl < 100.0,
          "wholebody8 at 2.5 cm over 64^3: monitor median " + fmt(mon, 3) + " ms (max " + fmt(mon_max, 3) + ", n=" +
              std::to_string(log.monitor_ms.size()) + "), re-plan median " + fmt(pl, 3) + " ms (max " +
              fmt(pl_max, 3) + ", n=" + std::to_string(replans.size()) + ")"};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DFPLAN_CLI + "\" -q " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// 10. Identical CLI invocations give identical bytes.
Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / ("dfplan_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string config = std::string(DFPLAN_SOURCE_DIR) + "/configs/floor_pickup.yaml";
  std::vector<int> codes;
  for (const char* run : {"a", "b"}) {
    codes.push_back(run_cli("study --case nav2d --out \"" + (root / run / "study").string() + "\""));
    codes.push_back(run_cli("replan \"" + config + "\" --out \"" + (root / run / "replan").string() + "\""));
  }
  std::vector<std::string> files = {"study/nav2d_problems.csv", "study/nav2d_summary.json", "replan/log.json",
                                    "replan/trajectory.csv"};
  int differ = 0, missing = 0;
  for (const auto& f : files) {
    const fs::path a = root / "a" / f, b = root / "b" / f;
    if (!fs::exists(a) || !fs::exists(b) || fs::file_size(a) == 0) {
      ++missing;
      continue;
    }
    differ += read_file(a) != read_file(b);
  }
  fs::remove_all(root);
  const bool ok_codes = std::all_of(codes.begin(), codes.end(), [](int c) { return c == 0; });
  return {ok_codes && differ == 0 && missing == 0,
          "2 x (study nav2d + replan floor_pickup): " + std::to_string(files.size() - differ - missing) + "/" +
              std::to_string(files.size()) + " outputs byte-identical" + (ok_codes ? "" : ", nonzero exit code")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"EDT exactness", edt_exactness},
      {"SDF construction identity", sdf_identity},
      {"signed/unsigned cost ratio", signed_cost_ratio},
      {"Jacobian suite", jacobian_suite},
      {"GP interpolation", gp_interpolation},
      {"study directionality", study_directionality},
      {"refit advantage", refit_advantage},
      {"end-to-end re-planning", end_to_end},
      {"re-plan cycle budget", cycle_budget},
      {"CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
