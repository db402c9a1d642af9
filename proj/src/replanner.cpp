#include "dfplan/replanner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace dfplan {

void ReplanConfig::validate() const {
  if (!(monitor_rate > 0) || !(replan_rate_cap > 0) || !(map_rate > 0))
    throw std::invalid_argument("replan: rates must be > 0");
  if (!(cost_tolerance_factor > 1.0)) throw std::invalid_argument("replan: cost_tolerance_factor must be > 1");
  if (!(abs_slack >= 0.0)) throw std::invalid_argument("replan: abs_slack must be >= 0");
  if (!(goal_tol > 0.0)) throw std::invalid_argument("replan: goal_tol must be > 0");
  if (!(exec_interp_dt > 0.0)) throw std::invalid_argument("replan: exec_interp_dt must be > 0");
  if (!(timeout > 0.0)) throw std::invalid_argument("replan: timeout must be > 0");
  if (!(velocity_headroom >= 1.0)) throw std::invalid_argument("replan: velocity_headroom must be >= 1");
}

HorizonEstimate estimate_parameters(const VecX& xc, const VecX& xg, const VecX& vmax, double dt) {
  if (xc.size() != xg.size() || xc.size() != vmax.size())
    throw std::invalid_argument("estimate_parameters: dimension mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("estimate_parameters: dt must be > 0");
  double t = 0.0;
  for (Eigen::Index j = 0; j < xc.size(); ++j) t = std::max(t, std::abs(xg[j] - xc[j]) / vmax[j]);
  // Guard against 2.0000000001 steps becoming 3.
  long steps = static_cast<long>(std::ceil(t / dt - 1e-9));
  steps = std::max(steps, 2L);
  HorizonEstimate h;
  h.dt = dt;
  h.n_states = static_cast<int>(steps) + 1;
  h.total_time = dt * static_cast<double>(steps);
  return h;
}

const char* to_string(ExecStatus s) {
  switch (s) {
    case ExecStatus::kExecuting: return "executing";
    case ExecStatus::kReplanning: return "replanning";
    case ExecStatus::kReached: return "reached";
    case ExecStatus::kFailed: return "failed";
  }
  return "unknown";
}

const char* to_string(Validity v) {
  switch (v) {
    case Validity::kValid: return "valid";
    case Validity::kCollision: return "collision";
    case Validity::kCost: return "cost";
  }
  return "unknown";
}

std::string ValidityReport::reason() const {
  std::ostringstream os;
  os << to_string(verdict);
  if (verdict == Validity::kCollision) os << " at t=" << time;
  if (verdict == Validity::kCost) os << ": cost " << cost << " > " << threshold;
  return os.str();
}

ValidityReport still_valid(const ExecutionState& exec, const FactorGraph& graph,
                           const ReplanConfig& cfg) {
  ValidityReport rep;
  const ClearanceReport c = trajectory_clearance(graph.model(), exec.active, *graph.field(),
                                                 graph.qc(), cfg.exec_interp_dt, exec.clock);
  rep.min_clearance = c.min_clearance;
  if (!c.collision_free) {
    rep.verdict = Validity::kCollision;
    rep.time = c.first_collision_time;
    return rep;
  }
  rep.cost = graph.cost(exec.active);
  rep.threshold = exec.initial_cost * cfg.cost_tolerance_factor + cfg.abs_slack;
  if (rep.cost > rep.threshold) rep.verdict = Validity::kCost;
  return rep;
}

Trajectory refit_trajectory(const Trajectory& old, const SupportState& xc, int new_n, double dt,
                            const MatX& qc, double t0) {
  if (old.states.empty()) throw std::invalid_argument("refit_trajectory: empty trajectory");
  if (new_n < 2) throw std::invalid_argument("refit_trajectory: need at least 2 states");
  Trajectory out;
  out.dt = dt;
  out.t0 = t0;
  out.states.reserve(new_n);
  out.states.push_back(xc);
  const double from = std::clamp(t0, old.t0, old.end_time());
  const double span = old.end_time() - from;
  const double new_span = dt * (new_n - 1);
  const double scale = span / new_span;
  for (int i = 1; i < new_n; ++i) {
    if (i == new_n - 1 || span <= 0.0) {
      SupportState s = old.states.back();
      if (span <= 0.0) s.velocity.setZero();
      out.states.push_back(std::move(s));
      continue;
    }
    const double t = std::min(from + span * i / (new_n - 1), old.end_time());
    SupportState s = gp_interpolate(old, t, qc);
    s.velocity *= scale;
    out.states.push_back(std::move(s));
  }
  return out;
}

double peak_speed_ratio(const Trajectory& t, const MatX& qc, const VecX& vmax, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("peak_speed_ratio: step must be > 0");
  double worst = 0.0;
  const long steps = static_cast<long>(std::ceil(t.duration() / step - 1e-9));
  for (long m = 0; m <= steps; ++m) {
    const double tau = std::min(t.t0 + static_cast<double>(m) * step, t.end_time());
    const VecX v = gp_interpolate(t, tau, qc).velocity;
    worst = std::max(worst, (v.cwiseAbs().array() / vmax.array()).maxCoeff());
  }
  return worst;
}

Trajectory time_scaled(const Trajectory& t, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("time_scaled: factor must be > 0");
  Trajectory out = t;
  out.dt = t.dt * factor;
  for (auto& s : out.states) s.velocity /= factor;
  return out;
}

namespace {

double min_clearance(const RobotModel& model, const VecX& q, const DistanceField& field) {
  const auto centers = forward_kinematics(model, q);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < centers.size(); ++s)
    m = std::min(m, field.distance(centers[s]) - model.spheres[s].radius);
  return m;
}

SupportState state_at(const Trajectory& t, double clock, const MatX& qc) {
  if (clock >= t.end_time()) return {t.states.back().position, VecX::Zero(t.dof())};
  return gp_interpolate(t, std::max(clock, t.t0), qc);
}

constexpr double kSpeedMargin = 1.001;

struct Planned {
  Trajectory trajectory;
  double cost = 0.0;  // graph cost of the accepted trajectory
  std::shared_ptr<const FactorGraph> graph;
  PlanRecord record;
};

Planned plan_once(const ReplanProblem& p, const SupportState& xc, double clock,
                  std::shared_ptr<const DistanceField> field, const Trajectory* previous,
                  const std::string& trigger) {
  Stopwatch sw;
  PlannerParams params = p.params;
  params.lm = replan_profile();
  const MatX qc = params.qc_matrix(p.model.dof());
  const VecX vplan = p.model.vmax() / p.cfg.velocity_headroom;
  const HorizonEstimate h = estimate_parameters(xc.position, p.goal, vplan, params.dt);
  const SupportState goal{p.goal, VecX::Zero(p.goal.size())};
  auto graph = std::make_shared<const FactorGraph>(
      build_graph(p.model, xc, goal, params, field, h.n_states));
  const Trajectory init = previous ? refit_trajectory(*previous, xc, h.n_states, h.dt, qc, clock)
                                   : init_straight_line(xc.position, p.goal, h.dt, h.n_states, clock);
  const OptimizeResult res = optimize_lm(*graph, init, params.lm);
  Trajectory traj = res.trajectory;
  // Slow the whole plan down uniformly if any DoF would exceed its limit.
  const double ratio = peak_speed_ratio(traj, qc, p.model.vmax(), p.cfg.exec_interp_dt / 8);
  double scale = 1.0;
  if (ratio > 1.0) {
    scale = ratio * kSpeedMargin;
    traj = time_scaled(traj, scale);
    PlannerParams slow = params;
    slow.dt = traj.dt;
    graph = std::make_shared<const FactorGraph>(
        build_graph(p.model, traj.states.front(), goal, slow, field, h.n_states));
  }
  const ClearanceReport c =
      trajectory_clearance(p.model, traj, *field, qc, p.cfg.exec_interp_dt, clock);

  Planned out;
  out.cost = graph->cost(traj);
  out.trajectory = std::move(traj);
  out.graph = std::move(graph);
  PlanRecord& r = out.record;
  r.time = clock;
  r.trigger = trigger;
  r.init = previous ? "refit" : "straight";
  r.n_states = h.n_states;
  r.dt = out.trajectory.dt;
  r.iterations = res.iterations;
  r.time_scale = scale;
  r.stop_reason = to_string(res.reason);
  r.initial_error = res.initial_error;
  r.final_error = res.final_error;
  r.collision_free = c.collision_free;
  r.min_clearance = c.min_clearance;
  r.plan_ms = sw.elapsed_ms();
  return out;
}

void check_problem(const ReplanProblem& p) {
  p.model.validate();
  p.params.validate();
  p.cfg.validate();
  if (p.start.size() != p.model.dof() || p.goal.size() != p.model.dof())
    throw std::invalid_argument("replan: start/goal dimension does not match robot DoF");
}

int ticks_per(double period, double tick) {
  return std::max(1, static_cast<int>(std::lround(period / tick)));
}

}  // namespace

ExecutionLog run_replanning(const ReplanProblem& p, WorldSim& world) {
  check_problem(p);
  const ReplanConfig& cfg = p.cfg;
  const double tick = cfg.exec_interp_dt;
  const int monitor_every = ticks_per(1.0 / cfg.monitor_rate, tick);
  const int map_every = ticks_per(1.0 / cfg.map_rate, tick);
  const MatX qc = p.params.qc_matrix(p.model.dof());
  const double t_begin = world.clock();

  ExecutionLog log;
  log.scenario = p.name;
  log.min_clearance = std::numeric_limits<double>::infinity();

  std::shared_ptr<const DistanceField> field = world.field();
  ExecutionState exec;
  exec.clock = t_begin;
  exec.current = {p.start, VecX::Zero(p.start.size())};

  auto accept = [&](Planned&& pl) {
    pl.record.index = static_cast<int>(log.plans.size());
    log.replan_ms.push_back(pl.record.plan_ms);
    log.plans.push_back(pl.record);
    exec.active = std::move(pl.trajectory);
    exec.initial_cost = pl.cost;
    return std::move(pl.graph);
  };

  std::shared_ptr<const FactorGraph> graph =
      accept(plan_once(p, exec.current, exec.clock, field, nullptr, "initial"));
  double last_plan = exec.clock;
  std::shared_ptr<const DistanceField> checked_field;
  int checked_plan = -1;
  ValidityReport last;

  for (long k = 1;; ++k) {
    exec.clock = t_begin + static_cast<double>(k) * tick;
    if (k % map_every == 0 && exec.clock > world.clock()) world.step(exec.clock - world.clock());
    field = world.field();
    exec.current = state_at(exec.active, exec.clock, qc);

    ExecSample sample;
    sample.time = exec.clock;
    sample.position = exec.current.position;
    sample.clearance = min_clearance(p.model, exec.current.position, *field);
    sample.plan = static_cast<int>(log.plans.size()) - 1;
    log.min_clearance = std::min(log.min_clearance, sample.clearance);
    log.samples.push_back(sample);

    if (sample.clearance <= 0.0) {
      log.status = ExecStatus::kFailed;
      log.reason = "executed state in collision";
      break;
    }
    const bool finished = exec.clock >= exec.active.end_time();
    if (finished && ((exec.current.position - p.goal).cwiseAbs().array() <= cfg.goal_tol).all()) {
      log.status = ExecStatus::kReached;
      log.reason = "goal reached";
      break;
    }
    if (exec.clock - t_begin >= cfg.timeout) {
      log.status = ExecStatus::kFailed;
      log.reason = "timeout";
      break;
    }
    if (k % monitor_every != 0) continue;

    const int plan_id = static_cast<int>(log.plans.size());
    if (field != checked_field || plan_id != checked_plan) {
      Stopwatch sw;
      last = still_valid(exec, graph->field() == field ? *graph : graph->with_field(field), cfg);
      log.monitor_ms.push_back(sw.elapsed_ms());
      ++log.monitor_checks;
      checked_field = field;
      checked_plan = plan_id;
      if (!last.valid()) ++log.invalid_checks;
    }
    std::string trigger;
    if (!last.valid())
      trigger = to_string(last.verdict);
    else if (finished)
      trigger = "horizon";
    if (trigger.empty()) continue;
    if (exec.clock - last_plan < 1.0 / cfg.replan_rate_cap - 1e-9) continue;

    exec.status = ExecStatus::kReplanning;
    graph = accept(plan_once(p, exec.current, exec.clock, field, &exec.active, trigger));
    last_plan = exec.clock;
    exec.status = ExecStatus::kExecuting;
  }
  log.finish_time = exec.clock;
  return log;
}

ExecutionLog run_replanning_threaded(const ReplanProblem& p, WorldSim& world) {
  check_problem(p);
  using clock = std::chrono::steady_clock;
  const ReplanConfig& cfg = p.cfg;
  const MatX qc = p.params.qc_matrix(p.model.dof());
  const double t_begin = world.clock();
  const auto wall0 = clock::now();
  auto now = [&] { return t_begin + std::chrono::duration<double>(clock::now() - wall0).count(); };

  std::atomic<bool> running{true};
  std::thread mapper([&] {
    const auto period = std::chrono::duration<double>(1.0 / cfg.map_rate);
    auto next = clock::now();
    while (running.load()) {
      next += std::chrono::duration_cast<clock::duration>(period);
      std::this_thread::sleep_until(next);
      const double t = now();
      if (t > world.clock()) world.step(t - world.clock());
    }
  });

  ExecutionLog log;
  log.scenario = p.name;
  log.min_clearance = std::numeric_limits<double>::infinity();
  ExecutionState exec;
  exec.current = {p.start, VecX::Zero(p.start.size())};
  exec.clock = now();

  auto accept = [&](Planned&& pl) {
    pl.record.index = static_cast<int>(log.plans.size());
    log.replan_ms.push_back(pl.record.plan_ms);
    log.plans.push_back(pl.record);
    exec.active = std::move(pl.trajectory);
    exec.initial_cost = pl.cost;
    return std::move(pl.graph);
  };

  std::shared_ptr<const FactorGraph> graph =
      accept(plan_once(p, exec.current, exec.clock, world.publisher().latest(), nullptr, "initial"));
  double last_plan = exec.clock;
  std::future<Planned> pending;
  const auto tick = std::chrono::duration<double>(1.0 / cfg.monitor_rate);
  auto next = clock::now();

  while (true) {
    next += std::chrono::duration_cast<clock::duration>(tick);
    std::this_thread::sleep_until(next);
    exec.clock = now();
    if (pending.valid() && pending.wait_for(std::chrono::seconds(0)) == std::future_status::ready)
      graph = accept(pending.get());  // swap; the executor reads the new plan from here on
    const auto field = world.publisher().latest();
    exec.current = state_at(exec.active, exec.clock, qc);

    ExecSample sample{exec.clock, exec.current.position,
                      min_clearance(p.model, exec.current.position, *field),
                      static_cast<int>(log.plans.size()) - 1};
    log.min_clearance = std::min(log.min_clearance, sample.clearance);
    log.samples.push_back(sample);
    if (sample.clearance <= 0.0) {
      log.status = ExecStatus::kFailed;
      log.reason = "executed state in collision";
      break;
    }
    const bool finished = exec.clock >= exec.active.end_time();
    if (finished && ((exec.current.position - p.goal).cwiseAbs().array() <= cfg.goal_tol).all()) {
      log.status = ExecStatus::kReached;
      log.reason = "goal reached";
      break;
    }
    if (exec.clock - t_begin >= cfg.timeout) {
      log.status = ExecStatus::kFailed;
      log.reason = "timeout";
      break;
    }
    if (pending.valid()) continue;
    Stopwatch sw;
    const ValidityReport v = still_valid(exec, graph->with_field(field), cfg);
    log.monitor_ms.push_back(sw.elapsed_ms());
    ++log.monitor_checks;
    if (!v.valid()) ++log.invalid_checks;
    std::string trigger = v.valid() ? (finished ? "horizon" : "") : to_string(v.verdict);
    if (trigger.empty() || exec.clock - last_plan < 1.0 / cfg.replan_rate_cap) continue;
    last_plan = exec.clock;
    pending = std::async(std::launch::async, [&p, cur = exec.current, t = exec.clock, field,
                                              prev = exec.active, trigger] {
      return plan_once(p, cur, t, field, &prev, trigger);
    });
  }
  running.store(false);
  if (pending.valid()) pending.wait();
  mapper.join();
  log.finish_time = exec.clock;
  return log;
}

void write_log_json(std::ostream& os, const ExecutionLog& log) {
  nlohmann::ordered_json j;
  j["scenario"] = log.scenario;
  j["status"] = to_string(log.status);
  j["reason"] = log.reason;
  j["finish_time"] = log.finish_time;
  j["replans"] = log.replans();
  j["monitor_checks"] = log.monitor_checks;
  j["invalid_checks"] = log.invalid_checks;
  j["min_clearance"] = log.min_clearance;
  j["samples"] = log.samples.size();
  auto& plans = j["plans"] = nlohmann::ordered_json::array();
  for (const auto& r : log.plans) {
    nlohmann::ordered_json pj;
    pj["index"] = r.index;
    pj["time"] = r.time;
    pj["trigger"] = r.trigger;
    pj["init"] = r.init;
    pj["n_states"] = r.n_states;
    pj["dt"] = r.dt;
    pj["iterations"] = r.iterations;
    pj["time_scale"] = r.time_scale;
    pj["stop_reason"] = r.stop_reason;
    pj["initial_error"] = r.initial_error;
    pj["final_error"] = r.final_error;
    pj["collision_free"] = r.collision_free;
    pj["min_clearance"] = r.min_clearance;
    plans.push_back(std::move(pj));
  }
  // Clearance over time, one entry per plan segment boundary and every 0.1 s.
  auto& series = j["clearance_series"] = nlohmann::ordered_json::array();
  double next = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    const auto& s = log.samples[i];
    const bool boundary = i > 0 && log.samples[i - 1].plan != s.plan;
    if (s.time + 1e-12 >= next || boundary || i + 1 == log.samples.size()) {
      series.push_back({s.time, s.clearance});
      if (s.time + 1e-12 >= next) next = s.time + 0.1;
    }
  }
  os << j.dump(2) << '\n';
}

void write_log_csv(std::ostream& os, const ExecutionLog& log) {
  const int dof = log.samples.empty() ? 0 : static_cast<int>(log.samples.front().position.size());
  os << "t";
  for (int d = 0; d < dof; ++d) os << ",q" << d;
  os << ",clearance,plan\n";
  os << std::setprecision(17);
  for (const auto& s : log.samples) {
    os << s.time;
    for (int d = 0; d < dof; ++d) os << ',' << s.position[d];
    os << ',' << s.clearance << ',' << s.plan << '\n';
  }
}

void write_timings_csv(std::ostream& os, const ExecutionLog& log) {
  os << "kind,index,ms\n" << std::setprecision(6);
  for (std::size_t i = 0; i < log.replan_ms.size(); ++i) os << "plan," << i << ',' << log.replan_ms[i] << '\n';
  for (std::size_t i = 0; i < log.monitor_ms.size(); ++i) os << "monitor," << i << ',' << log.monitor_ms[i] << '\n';
}

}  // namespace dfplan
