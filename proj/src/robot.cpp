#include "dfplan/robot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dfplan {

Eigen::Isometry3d Pose::isometry() const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translation() = xyz;
  t.linear() = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                   .toRotationMatrix();
  return t;
}

VecX RobotModel::lower() const {
  VecX v(dof());
  if (base_dof()) v.head<3>() = base_lower;
  for (std::size_t j = 0; j < joints.size(); ++j) v[base_dof() + j] = joints[j].lower;
  return v;
}

VecX RobotModel::upper() const {
  VecX v(dof());
  if (base_dof()) v.head<3>() = base_upper;
  for (std::size_t j = 0; j < joints.size(); ++j) v[base_dof() + j] = joints[j].upper;
  return v;
}

VecX RobotModel::vmax() const {
  VecX v(dof());
  if (base_dof()) v.head<3>() = base_vmax;
  for (std::size_t j = 0; j < joints.size(); ++j) v[base_dof() + j] = joints[j].vmax;
  return v;
}

double RobotModel::max_radius() const {
  double r = 0.0;
  for (const auto& s : spheres) r = std::max(r, s.radius);
  return r;
}

bool RobotModel::within_limits(const VecX& q) const {
  if (q.size() != dof()) return false;
  return ((q - lower()).array() >= 0.0).all() && ((upper() - q).array() >= 0.0).all();
}

void RobotModel::validate() const {
  if (dof() == 0) throw std::invalid_argument("robot '" + name + "': no degrees of freedom");
  if (base_dof())
    for (int i = 0; i < 3; ++i) {
      if (!(base_lower[i] <= base_upper[i]))
        throw std::invalid_argument("robot '" + name + "': base limit lo > hi");
      if (!(base_vmax[i] > 0.0)) throw std::invalid_argument("robot '" + name + "': base vmax must be > 0");
    }
  for (const auto& j : joints) {
    if (!(j.lower <= j.upper)) throw std::invalid_argument("joint '" + j.name + "': limit lo > hi");
    if (!(j.vmax > 0.0)) throw std::invalid_argument("joint '" + j.name + "': vmax must be > 0");
    if (std::abs(j.axis.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("joint '" + j.name + "': axis must be a unit vector");
  }
  if (spheres.empty()) throw std::invalid_argument("robot '" + name + "': no collision spheres");
  for (const auto& s : spheres) {
    if (s.frame < 0 || s.frame >= num_frames())
      throw std::invalid_argument("robot '" + name + "': sphere attached to invalid frame");
    if (!(s.radius > 0.0)) throw std::invalid_argument("robot '" + name + "': sphere radius must be > 0");
  }
}

bool RobotModel::operator==(const RobotModel& o) const {
  return name == o.name && base == o.base && mount == o.mount && base_lower == o.base_lower &&
         base_upper == o.base_upper && base_vmax == o.base_vmax && joints == o.joints &&
         spheres == o.spheres;
}

namespace {

Eigen::Isometry3d base_transform(const RobotModel& m, const VecX& q) {
  if (m.base == BaseType::kFixed) return m.mount.isometry();
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translation() = Vec3(q[0], q[1], 0.0);
  t.linear() = Eigen::AngleAxisd(q[2], Vec3::UnitZ()).toRotationMatrix();
  return t * m.mount.isometry();
}

Eigen::Isometry3d joint_motion(const Joint& j, double q) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  if (j.type == JointType::kRevolute)
    t.linear() = Eigen::AngleAxisd(q, j.axis).toRotationMatrix();
  else
    t.translation() = q * j.axis;
  return t;
}

void check_dim(const RobotModel& m, const VecX& q) {
  if (q.size() != m.dof())
    throw std::invalid_argument("configuration has " + std::to_string(q.size()) +
                                " entries; robot '" + m.name + "' has " + std::to_string(m.dof()) +
                                " DoF");
}

}  // namespace

std::vector<Eigen::Isometry3d> frame_transforms(const RobotModel& model, const VecX& q) {
  check_dim(model, q);
  std::vector<Eigen::Isometry3d> frames;
  frames.reserve(model.num_frames());
  frames.push_back(base_transform(model, q));
  const int b = model.base_dof();
  for (std::size_t j = 0; j < model.joints.size(); ++j)
    frames.push_back(frames.back() * model.joints[j].parent.isometry() *
                     joint_motion(model.joints[j], q[b + j]));
  return frames;
}

SphereKinematics sphere_kinematics(const RobotModel& model, const VecX& q, bool with_jacobians) {
  check_dim(model, q);
  const int b = model.base_dof();
  const std::size_t nj = model.joints.size();

  std::vector<Eigen::Isometry3d> frames;
  std::vector<Vec3> joint_origin(nj), joint_axis(nj);
  frames.reserve(nj + 1);
  frames.push_back(base_transform(model, q));
  for (std::size_t j = 0; j < nj; ++j) {
    const Joint& jt = model.joints[j];
    const Eigen::Isometry3d pre = frames.back() * jt.parent.isometry();
    joint_origin[j] = pre.translation();
    joint_axis[j] = pre.linear() * jt.axis;
    frames.push_back(pre * joint_motion(jt, q[b + j]));
  }

  SphereKinematics out;
  out.centers.reserve(model.spheres.size());
  for (const auto& s : model.spheres) out.centers.push_back(frames[s.frame] * s.offset);
  if (!with_jacobians) return out;

  out.jacobians.reserve(model.spheres.size());
  for (std::size_t si = 0; si < model.spheres.size(); ++si) {
    const Vec3& c = out.centers[si];
    Eigen::Matrix<double, 3, Eigen::Dynamic> jac = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, model.dof());
    if (b) {
      jac.col(0) = Vec3::UnitX();
      jac.col(1) = Vec3::UnitY();
      jac.col(2) = Vec3::UnitZ().cross(c - Vec3(q[0], q[1], 0.0));
    }
    const int frame = model.spheres[si].frame;
    for (int j = 0; j < frame; ++j) {
      if (model.joints[j].type == JointType::kRevolute)
        jac.col(b + j) = joint_axis[j].cross(c - joint_origin[j]);
      else
        jac.col(b + j) = joint_axis[j];
    }
    out.jacobians.push_back(std::move(jac));
  }
  return out;
}

std::vector<Vec3> forward_kinematics(const RobotModel& model, const VecX& q) {
  return sphere_kinematics(model, q, false).centers;
}

std::vector<Eigen::Matrix<double, 3, Eigen::Dynamic>> sphere_jacobians(const RobotModel& model,
                                                                       const VecX& q) {
  return sphere_kinematics(model, q, true).jacobians;
}

// Built-in models. None of these are manufacturer kinematics; they are
// compact stand-ins with the right DoF structure and plausible dimensions.

RobotModel make_nav2d() {
  RobotModel m;
  m.name = "nav2d";
  m.base = BaseType::kFixed;
  Joint x{"x", JointType::kPrismatic, Vec3::UnitX(), {}, -10.0, 10.0, 0.5};
  Joint y{"y", JointType::kPrismatic, Vec3::UnitY(), {}, -10.0, 10.0, 0.5};
  m.joints = {x, y};
  m.spheres = {{2, Vec3::Zero(), 0.15}};
  return m;
}

RobotModel make_arm7() {
  RobotModel m;
  m.name = "arm7";
  m.base = BaseType::kFixed;
  constexpr double pi = std::numbers::pi;
  // Alternating twist (z) and bend (y) joints; link lengths 0.15 / 0.3 m.
  const double lengths[7] = {0.15, 0.3, 0.15, 0.3, 0.15, 0.3, 0.15};
  for (int j = 0; j < 7; ++j) {
    Joint jt;
    jt.name = "joint" + std::to_string(j + 1);
    jt.type = JointType::kRevolute;
    const bool bend = j % 2 == 1;
    jt.axis = bend ? Vec3::UnitY() : Vec3::UnitZ();
    jt.parent.xyz = Vec3(0, 0, j == 0 ? 0.1 : lengths[j - 1]);
    jt.lower = bend ? -0.5 * pi : -pi;
    jt.upper = bend ? 0.5 * pi : pi;
    jt.vmax = 1.0;
    m.joints.push_back(jt);
  }
  m.spheres.push_back({0, Vec3(0, 0, 0.05), 0.08});
  for (int f = 1; f <= 7; ++f) {
    const double len = lengths[f - 1];
    m.spheres.push_back({f, Vec3(0, 0, 0.5 * len), 0.06});
    m.spheres.push_back({f, Vec3(0, 0, len), 0.06});
  }
  m.spheres.push_back({7, Vec3(0, 0, 0.25), 0.05});  // tool tip
  return m;
}

RobotModel make_wholebody8() {
  RobotModel m;
  m.name = "wholebody8";
  m.base = BaseType::kPlanarHolonomic;
  m.base_lower = Eigen::Vector3d(-5, -5, -std::numbers::pi);
  m.base_upper = Eigen::Vector3d(5, 5, std::numbers::pi);
  m.base_vmax = Eigen::Vector3d(0.4, 0.4, 0.8);
  m.joints = {
      {"arm_lift", JointType::kPrismatic, Vec3::UnitZ(), {Vec3(0.0, 0.0, 0.3), Vec3::Zero()}, 0.0, 0.35, 0.2},
      {"arm_flex", JointType::kRevolute, Vec3::UnitY(), {Vec3(0.1, 0.0, 0.1), Vec3::Zero()}, 0.0, 2.6, 1.0},
      {"arm_roll", JointType::kRevolute, Vec3::UnitZ(), {Vec3(0.0, 0.0, 0.3), Vec3::Zero()}, -2.0, 2.0, 1.0},
      {"wrist_flex", JointType::kRevolute, Vec3::UnitY(), {Vec3(0.0, 0.0, 0.2), Vec3::Zero()}, -1.9, 1.2, 1.0},
      {"wrist_roll", JointType::kRevolute, Vec3::UnitZ(), {Vec3(0.0, 0.0, 0.05), Vec3::Zero()}, -2.0, 2.0, 1.0},
  };
  m.spheres = {
      // Base and torso (frame 0).
      {0, Vec3(0.0, 0.0, 0.15), 0.22},
      {0, Vec3(0.0, 0.0, 0.45), 0.15},
      // Lift carriage.
      {1, Vec3(0.05, 0.0, 0.1), 0.1},
      // Upper arm.
      {2, Vec3(0.0, 0.0, 0.0), 0.07},
      {2, Vec3(0.0, 0.0, 0.15), 0.06},
      {3, Vec3(0.0, 0.0, 0.0), 0.06},
      {3, Vec3(0.0, 0.0, 0.1), 0.05},
      // Wrist and hand.
      {4, Vec3(0.0, 0.0, 0.0), 0.05},
      {5, Vec3(0.0, 0.0, 0.08), 0.05},
      {5, Vec3(0.0, 0.0, 0.15), 0.04},
  };
  return m;
}

std::vector<std::string> builtin_model_names() { return {"nav2d", "arm7", "wholebody8"}; }

RobotModel builtin_model(const std::string& name) {
  if (name == "nav2d") return make_nav2d();
  if (name == "arm7") return make_arm7();
  if (name == "wholebody8") return make_wholebody8();
  throw std::invalid_argument("unknown builtin robot '" + name + "' (expected nav2d|arm7|wholebody8)");
}

}  // namespace dfplan
