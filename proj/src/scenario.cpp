#include "dfplan/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace dfplan {

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                         message),
      line_(line) {}

ReplanProblem Scenario::problem() const { return {name, robot, start, goal, params, replan}; }

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const int line = at.IsDefined() && at.Mark().line >= 0 ? at.Mark().line + 1 : 0;
    throw ConfigError(source_, line, msg);
  }

  void expect_map(const YAML::Node& n, const std::string& ctx) const {
    if (!n.IsMap()) fail(n, "'" + ctx + "' must be a mapping");
  }

  void allow_keys(const YAML::Node& n, const std::string& ctx, std::set<std::string> keys) const {
    expect_map(n, ctx);
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!keys.count(key)) fail(kv.first, "unknown field '" + key + "' in '" + ctx + "'");
    }
  }

  YAML::Node require(const YAML::Node& n, const std::string& key, const std::string& ctx) const {
    const YAML::Node v = n[key];
    if (!v.IsDefined() || v.IsNull()) fail(n, "missing required field '" + key + "' in '" + ctx + "'");
    return v;
  }

  template <typename T>
  T as(const YAML::Node& n, const std::string& what) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "field '" + what + "' has the wrong type");
    }
  }

  template <typename T>
  void opt(const YAML::Node& n, const std::string& key, T& out, const std::string& ctx) const {
    const YAML::Node v = n[key];
    if (v.IsDefined() && !v.IsNull()) out = as<T>(v, ctx + "." + key);
  }

  VecX vec(const YAML::Node& n, const std::string& what, int size = -1) const {
    if (!n.IsSequence()) fail(n, "field '" + what + "' must be a list of numbers");
    if (size >= 0 && static_cast<int>(n.size()) != size)
      fail(n, "field '" + what + "' must have " + std::to_string(size) + " entries");
    VecX v(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) v[i] = as<double>(n[i], what);
    return v;
  }

  Vec3 vec3(const YAML::Node& n, const std::string& what) const { return vec(n, what, 3); }

  std::string source_;
};

Pose read_pose(const Reader& r, const YAML::Node& n, const std::string& ctx) {
  r.allow_keys(n, ctx, {"xyz", "rpy"});
  Pose p;
  if (n["xyz"]) p.xyz = r.vec3(n["xyz"], ctx + ".xyz");
  if (n["rpy"]) p.rpy = r.vec3(n["rpy"], ctx + ".rpy");
  return p;
}

RobotModel read_robot(const Reader& r, const YAML::Node& n) {
  r.allow_keys(n, "robot", {"builtin", "name", "base", "mount", "base_limits", "joints", "spheres"});
  RobotModel m;
  if (n["builtin"]) {
    const auto name = r.as<std::string>(n["builtin"], "robot.builtin");
    try {
      m = builtin_model(name);
    } catch (const std::invalid_argument&) {
      r.fail(n["builtin"], "unknown builtin robot '" + name + "'");
    }
  } else {
    r.require(n, "joints", "robot");
    r.require(n, "spheres", "robot");
  }
  r.opt(n, "name", m.name, "robot");
  if (n["base"]) {
    const auto b = r.as<std::string>(n["base"], "robot.base");
    if (b == "fixed") m.base = BaseType::kFixed;
    else if (b == "planar") m.base = BaseType::kPlanarHolonomic;
    else r.fail(n["base"], "robot.base must be 'fixed' or 'planar'");
  }
  if (n["mount"]) m.mount = read_pose(r, n["mount"], "robot.mount");
  if (n["base_limits"]) {
    const YAML::Node bl = n["base_limits"];
    r.allow_keys(bl, "robot.base_limits", {"lower", "upper", "vmax"});
    if (bl["lower"]) m.base_lower = r.vec3(bl["lower"], "robot.base_limits.lower");
    if (bl["upper"]) m.base_upper = r.vec3(bl["upper"], "robot.base_limits.upper");
    if (bl["vmax"]) m.base_vmax = r.vec3(bl["vmax"], "robot.base_limits.vmax");
  }
  if (n["joints"]) {
    const YAML::Node js = n["joints"];
    if (!js.IsSequence()) r.fail(js, "robot.joints must be a list");
    m.joints.clear();
    for (const auto& jn : js) {
      r.allow_keys(jn, "robot.joints[]", {"name", "type", "axis", "parent", "lower", "upper", "vmax"});
      Joint j;
      j.name = r.as<std::string>(r.require(jn, "name", "robot.joints[]"), "joint.name");
      const auto type = r.as<std::string>(r.require(jn, "type", "joint " + j.name), "joint.type");
      if (type == "revolute") j.type = JointType::kRevolute;
      else if (type == "prismatic") j.type = JointType::kPrismatic;
      else r.fail(jn["type"], "joint type must be 'revolute' or 'prismatic'");
      j.axis = r.vec3(r.require(jn, "axis", "joint " + j.name), "joint.axis");
      if (jn["parent"]) j.parent = read_pose(r, jn["parent"], "joint " + j.name + ".parent");
      j.lower = r.as<double>(r.require(jn, "lower", "joint " + j.name), "joint.lower");
      j.upper = r.as<double>(r.require(jn, "upper", "joint " + j.name), "joint.upper");
      j.vmax = r.as<double>(r.require(jn, "vmax", "joint " + j.name), "joint.vmax");
      m.joints.push_back(j);
    }
  }
  if (n["spheres"]) {
    const YAML::Node ss = n["spheres"];
    if (!ss.IsSequence()) r.fail(ss, "robot.spheres must be a list");
    m.spheres.clear();
    for (const auto& sn : ss) {
      r.allow_keys(sn, "robot.spheres[]", {"frame", "offset", "radius"});
      CollisionSphere s;
      s.frame = r.as<int>(r.require(sn, "frame", "robot.spheres[]"), "sphere.frame");
      s.offset = r.vec3(r.require(sn, "offset", "robot.spheres[]"), "sphere.offset");
      s.radius = r.as<double>(r.require(sn, "radius", "robot.spheres[]"), "sphere.radius");
      m.spheres.push_back(s);
    }
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(n, e.what());
  }
  return m;
}

void read_obstacle(const Reader& r, const YAML::Node& n, WorldConfig& w) {
  r.allow_keys(n, "obstacles[]", {"type", "center", "half_extents", "radius", "height", "waypoints"});
  const auto type = r.as<std::string>(r.require(n, "type", "obstacles[]"), "obstacle.type");
  Shape shape;
  if (type == "cuboid") {
    shape = Cuboid{r.vec3(r.require(n, "center", "cuboid"), "cuboid.center"),
                   r.vec3(r.require(n, "half_extents", "cuboid"), "cuboid.half_extents")};
  } else if (type == "cylinder") {
    shape = Cylinder{r.vec3(r.require(n, "center", "cylinder"), "cylinder.center"),
                     r.as<double>(r.require(n, "radius", "cylinder"), "cylinder.radius"),
                     r.as<double>(r.require(n, "height", "cylinder"), "cylinder.height")};
  } else {
    r.fail(n["type"], "obstacle type must be 'cuboid' or 'cylinder'");
  }
  try {
    validate_shape(shape);
  } catch (const std::invalid_argument& e) {
    r.fail(n, e.what());
  }
  if (!n["waypoints"]) {
    w.static_obstacles.push_back(shape);
    return;
  }
  MovingObstacle m;
  m.shape = shape;
  const YAML::Node wps = n["waypoints"];
  if (!wps.IsSequence()) r.fail(wps, "obstacle waypoints must be a list");
  for (const auto& wn : wps) {
    r.allow_keys(wn, "waypoints[]", {"time", "center"});
    const double t = r.as<double>(r.require(wn, "time", "waypoints[]"), "waypoint.time");
    if (!m.waypoints.empty() && !(t > m.waypoints.back().time))
      r.fail(wn["time"], "waypoint times must be strictly increasing");
    m.waypoints.push_back({t, r.vec3(r.require(wn, "center", "waypoints[]"), "waypoint.center")});
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(wps, e.what());
  }
  w.moving_obstacles.push_back(m);
}

void read_sensing(const Reader& r, const YAML::Node& n, WorldConfig& w) {
  r.allow_keys(n, "sensing", {"mode", "schedule", "azimuth_rays", "elevation_rays", "elevation_min",
                              "elevation_max", "max_range", "floor_band", "initial_logodds"});
  const auto mode = r.as<std::string>(r.require(n, "mode", "sensing"), "sensing.mode");
  if (mode == "omniscient") w.sensing = SensingMode::kOmniscient;
  else if (mode == "raycast") w.sensing = SensingMode::kRaycast;
  else r.fail(n["mode"], "sensing.mode must be 'omniscient' or 'raycast'");
  RaycastSensor& s = w.sensor;
  if (n["schedule"]) {
    const YAML::Node sch = n["schedule"];
    if (!sch.IsSequence()) r.fail(sch, "sensing.schedule must be a list");
    for (const auto& pn : sch) {
      r.allow_keys(pn, "sensing.schedule[]", {"time", "origin"});
      s.schedule.push_back({r.as<double>(r.require(pn, "time", "schedule[]"), "schedule.time"),
                            r.vec3(r.require(pn, "origin", "schedule[]"), "schedule.origin")});
    }
  }
  r.opt(n, "azimuth_rays", s.azimuth_rays, "sensing");
  r.opt(n, "elevation_rays", s.elevation_rays, "sensing");
  r.opt(n, "elevation_min", s.elevation_min, "sensing");
  r.opt(n, "elevation_max", s.elevation_max, "sensing");
  r.opt(n, "max_range", s.max_range, "sensing");
  r.opt(n, "floor_band", s.floor_band, "sensing");
  r.opt(n, "initial_logodds", s.initial_logodds, "sensing");
}

}  // namespace

Scenario scenario_from_yaml(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, e.mark.line + 1, "YAML syntax error: " + e.msg);
  }
  const Reader r(source);
  if (!root.IsMap()) throw ConfigError(source, 0, "top level must be a mapping");
  r.allow_keys(root, "scenario", {"version", "name", "seed", "robot", "start", "goal", "grid", "field",
                                  "occupancy", "sensing", "obstacles", "planner", "replan"});
  if (root["version"]) {
    const int v = r.as<int>(root["version"], "version");
    if (v != kConfigSchemaVersion) r.fail(root["version"], "unsupported schema version " + std::to_string(v));
  }
  Scenario s;
  s.name = r.as<std::string>(r.require(root, "name", "scenario"), "name");
  r.opt(root, "seed", s.seed, "scenario");
  s.robot = read_robot(r, r.require(root, "robot", "scenario"));
  s.start = r.vec(r.require(root, "start", "scenario"), "start", s.robot.dof());
  s.goal = r.vec(r.require(root, "goal", "scenario"), "goal", s.robot.dof());

  const YAML::Node g = r.require(root, "grid", "scenario");
  r.allow_keys(g, "grid", {"origin", "resolution", "dims"});
  s.world.grid.origin = r.vec3(r.require(g, "origin", "grid"), "grid.origin");
  s.world.grid.resolution = r.as<double>(r.require(g, "resolution", "grid"), "grid.resolution");
  const VecX dims = r.vec(r.require(g, "dims", "grid"), "grid.dims", 3);
  for (int i = 0; i < 3; ++i) s.world.grid.dims[i] = static_cast<int>(dims[i]);
  try {
    s.world.grid.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(g, e.what());
  }

  if (root["field"]) {
    try {
      s.world.kind = field_kind_from_string(r.as<std::string>(root["field"], "field"));
    } catch (const std::invalid_argument&) {
      r.fail(root["field"], "field must be 'signed' or 'unsigned'");
    }
  }
  if (root["occupancy"]) {
    const YAML::Node o = root["occupancy"];
    r.allow_keys(o, "occupancy", {"hit_delta", "miss_delta", "clamp_min", "clamp_max", "occupied_threshold"});
    auto& p = s.world.occupancy;
    r.opt(o, "hit_delta", p.hit_delta, "occupancy");
    r.opt(o, "miss_delta", p.miss_delta, "occupancy");
    r.opt(o, "clamp_min", p.clamp_min, "occupancy");
    r.opt(o, "clamp_max", p.clamp_max, "occupancy");
    r.opt(o, "occupied_threshold", p.occupied_threshold, "occupancy");
  }
  if (root["sensing"]) read_sensing(r, root["sensing"], s.world);
  if (root["obstacles"]) {
    const YAML::Node obs = root["obstacles"];
    if (!obs.IsSequence()) r.fail(obs, "obstacles must be a list");
    for (const auto& o : obs) read_obstacle(r, o, s.world);
  }
  if (root["planner"]) {
    const YAML::Node p = root["planner"];
    r.allow_keys(p, "planner", {"dt", "qc", "prior_sigma", "eps", "obs_sigma", "n_interp"});
    r.opt(p, "dt", s.params.dt, "planner");
    r.opt(p, "qc", s.params.qc, "planner");
    r.opt(p, "prior_sigma", s.params.prior_sigma, "planner");
    r.opt(p, "eps", s.params.eps, "planner");
    r.opt(p, "obs_sigma", s.params.obs_sigma, "planner");
    r.opt(p, "n_interp", s.params.n_interp, "planner");
    try {
      s.params.validate();
    } catch (const std::invalid_argument& e) {
      r.fail(p, e.what());
    }
  }
  s.params.lm = replan_profile();
  if (root["replan"]) {
    const YAML::Node p = root["replan"];
    r.allow_keys(p, "replan", {"monitor_rate", "replan_rate_cap", "map_rate", "cost_tolerance_factor",
                               "abs_slack", "goal_tol", "exec_interp_dt", "timeout", "velocity_headroom"});
    auto& c = s.replan;
    r.opt(p, "monitor_rate", c.monitor_rate, "replan");
    r.opt(p, "replan_rate_cap", c.replan_rate_cap, "replan");
    r.opt(p, "map_rate", c.map_rate, "replan");
    r.opt(p, "cost_tolerance_factor", c.cost_tolerance_factor, "replan");
    r.opt(p, "abs_slack", c.abs_slack, "replan");
    r.opt(p, "goal_tol", c.goal_tol, "replan");
    r.opt(p, "exec_interp_dt", c.exec_interp_dt, "replan");
    r.opt(p, "timeout", c.timeout, "replan");
    r.opt(p, "velocity_headroom", c.velocity_headroom, "replan");
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      r.fail(p, e.what());
    }
  }
  try {
    s.world.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source, 0, e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_yaml(ss.str(), path);
}

namespace {

void emit_vec(YAML::Emitter& e, const VecX& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) e << v[i];
  e << YAML::EndSeq;
}

void emit_pose(YAML::Emitter& e, const Pose& p) {
  e << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "xyz" << YAML::Value;
  emit_vec(e, p.xyz);
  e << YAML::Key << "rpy" << YAML::Value;
  emit_vec(e, p.rpy);
  e << YAML::EndMap;
}

void emit_shape(YAML::Emitter& e, const Shape& s) {
  if (const auto* c = std::get_if<Cuboid>(&s)) {
    e << YAML::Key << "type" << YAML::Value << "cuboid";
    e << YAML::Key << "center" << YAML::Value;
    emit_vec(e, c->center);
    e << YAML::Key << "half_extents" << YAML::Value;
    emit_vec(e, c->half_extents);
  } else {
    const auto& y = std::get<Cylinder>(s);
    e << YAML::Key << "type" << YAML::Value << "cylinder";
    e << YAML::Key << "center" << YAML::Value;
    emit_vec(e, y.center);
    e << YAML::Key << "radius" << YAML::Value << y.radius;
    e << YAML::Key << "height" << YAML::Value << y.height;
  }
}

}  // namespace

std::string scenario_to_yaml(const Scenario& s) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "version" << YAML::Value << kConfigSchemaVersion;
  e << YAML::Key << "name" << YAML::Value << s.name;
  e << YAML::Key << "seed" << YAML::Value << s.seed;

  const RobotModel& m = s.robot;
  e << YAML::Key << "robot" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << m.name;
  e << YAML::Key << "base" << YAML::Value << (m.base == BaseType::kFixed ? "fixed" : "planar");
  e << YAML::Key << "mount" << YAML::Value;
  emit_pose(e, m.mount);
  e << YAML::Key << "base_limits" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lower" << YAML::Value;
  emit_vec(e, m.base_lower);
  e << YAML::Key << "upper" << YAML::Value;
  emit_vec(e, m.base_upper);
  e << YAML::Key << "vmax" << YAML::Value;
  emit_vec(e, m.base_vmax);
  e << YAML::EndMap;
  e << YAML::Key << "joints" << YAML::Value << YAML::BeginSeq;
  for (const auto& j : m.joints) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << j.name;
    e << YAML::Key << "type" << YAML::Value << (j.type == JointType::kRevolute ? "revolute" : "prismatic");
    e << YAML::Key << "axis" << YAML::Value;
    emit_vec(e, j.axis);
    e << YAML::Key << "parent" << YAML::Value;
    emit_pose(e, j.parent);
    e << YAML::Key << "lower" << YAML::Value << j.lower;
    e << YAML::Key << "upper" << YAML::Value << j.upper;
    e << YAML::Key << "vmax" << YAML::Value << j.vmax;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::Key << "spheres" << YAML::Value << YAML::BeginSeq;
  for (const auto& sp : m.spheres) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "frame" << YAML::Value << sp.frame;
    e << YAML::Key << "offset" << YAML::Value;
    emit_vec(e, sp.offset);
    e << YAML::Key << "radius" << YAML::Value << sp.radius;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq << YAML::EndMap;

  e << YAML::Key << "start" << YAML::Value;
  emit_vec(e, s.start);
  e << YAML::Key << "goal" << YAML::Value;
  emit_vec(e, s.goal);

  const GridSpec& g = s.world.grid;
  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "origin" << YAML::Value;
  emit_vec(e, g.origin);
  e << YAML::Key << "resolution" << YAML::Value << g.resolution;
  e << YAML::Key << "dims" << YAML::Value << YAML::Flow << YAML::BeginSeq << g.dims[0] << g.dims[1]
    << g.dims[2] << YAML::EndSeq;
  e << YAML::EndMap;
  e << YAML::Key << "field" << YAML::Value << to_string(s.world.kind);

  const auto& o = s.world.occupancy;
  e << YAML::Key << "occupancy" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "hit_delta" << YAML::Value << o.hit_delta;
  e << YAML::Key << "miss_delta" << YAML::Value << o.miss_delta;
  e << YAML::Key << "clamp_min" << YAML::Value << o.clamp_min;
  e << YAML::Key << "clamp_max" << YAML::Value << o.clamp_max;
  e << YAML::Key << "occupied_threshold" << YAML::Value << o.occupied_threshold;
  e << YAML::EndMap;

  const auto& sn = s.world.sensor;
  e << YAML::Key << "sensing" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mode" << YAML::Value
    << (s.world.sensing == SensingMode::kOmniscient ? "omniscient" : "raycast");
  if (!sn.schedule.empty()) {
    e << YAML::Key << "schedule" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : sn.schedule) {
      e << YAML::Flow << YAML::BeginMap << YAML::Key << "time" << YAML::Value << p.time;
      e << YAML::Key << "origin" << YAML::Value;
      emit_vec(e, p.origin);
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }
  e << YAML::Key << "azimuth_rays" << YAML::Value << sn.azimuth_rays;
  e << YAML::Key << "elevation_rays" << YAML::Value << sn.elevation_rays;
  e << YAML::Key << "elevation_min" << YAML::Value << sn.elevation_min;
  e << YAML::Key << "elevation_max" << YAML::Value << sn.elevation_max;
  e << YAML::Key << "max_range" << YAML::Value << sn.max_range;
  e << YAML::Key << "floor_band" << YAML::Value << sn.floor_band;
  e << YAML::Key << "initial_logodds" << YAML::Value << sn.initial_logodds;
  e << YAML::EndMap;

  e << YAML::Key << "obstacles" << YAML::Value << YAML::BeginSeq;
  for (const auto& sh : s.world.static_obstacles) {
    e << YAML::BeginMap;
    emit_shape(e, sh);
    e << YAML::EndMap;
  }
  for (const auto& mo : s.world.moving_obstacles) {
    e << YAML::BeginMap;
    emit_shape(e, mo.shape);
    e << YAML::Key << "waypoints" << YAML::Value << YAML::BeginSeq;
    for (const auto& w : mo.waypoints) {
      e << YAML::Flow << YAML::BeginMap << YAML::Key << "time" << YAML::Value << w.time;
      e << YAML::Key << "center" << YAML::Value;
      emit_vec(e, w.center);
      e << YAML::EndMap;
    }
    e << YAML::EndSeq << YAML::EndMap;
  }
  e << YAML::EndSeq;

  const auto& p = s.params;
  e << YAML::Key << "planner" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dt" << YAML::Value << p.dt;
  e << YAML::Key << "qc" << YAML::Value << p.qc;
  e << YAML::Key << "prior_sigma" << YAML::Value << p.prior_sigma;
  e << YAML::Key << "eps" << YAML::Value << p.eps;
  e << YAML::Key << "obs_sigma" << YAML::Value << p.obs_sigma;
  e << YAML::Key << "n_interp" << YAML::Value << p.n_interp;
  e << YAML::EndMap;

  const auto& c = s.replan;
  e << YAML::Key << "replan" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "monitor_rate" << YAML::Value << c.monitor_rate;
  e << YAML::Key << "replan_rate_cap" << YAML::Value << c.replan_rate_cap;
  e << YAML::Key << "map_rate" << YAML::Value << c.map_rate;
  e << YAML::Key << "cost_tolerance_factor" << YAML::Value << c.cost_tolerance_factor;
  e << YAML::Key << "abs_slack" << YAML::Value << c.abs_slack;
  e << YAML::Key << "goal_tol" << YAML::Value << c.goal_tol;
  e << YAML::Key << "exec_interp_dt" << YAML::Value << c.exec_interp_dt;
  e << YAML::Key << "timeout" << YAML::Value << c.timeout;
  e << YAML::Key << "velocity_headroom" << YAML::Value << c.velocity_headroom;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace dfplan
