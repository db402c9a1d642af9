#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "dfplan/grid.hpp"

namespace dfplan {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

enum class BaseType { kFixed, kPlanarHolonomic };
enum class JointType { kRevolute, kPrismatic };

/// Rigid transform written as translation + roll/pitch/yaw (applied Z·Y·X).
struct Pose {
  Vec3 xyz = Vec3::Zero();
  Vec3 rpy = Vec3::Zero();

  Eigen::Isometry3d isometry() const;
  bool operator==(const Pose& o) const { return xyz == o.xyz && rpy == o.rpy; }
};

struct Joint {
  std::string name;
  JointType type = JointType::kRevolute;
  Vec3 axis = Vec3::UnitZ();
  Pose parent;  // from the previous frame to this joint's frame at q = 0
  double lower = -3.14159;
  double upper = 3.14159;
  double vmax = 1.0;

  bool operator==(const Joint& o) const {
    return name == o.name && type == o.type && axis == o.axis && parent == o.parent &&
           lower == o.lower && upper == o.upper && vmax == o.vmax;
  }
};

/// Sphere rigidly attached to a frame. Frame 0 is the base; frame j (1..J)
/// is the frame after joint j.
struct CollisionSphere {
  int frame = 0;
  Vec3 offset = Vec3::Zero();
  double radius = 0.1;

  bool operator==(const CollisionSphere& o) const {
    return frame == o.frame && offset == o.offset && radius == o.radius;
  }
};

struct RobotModel {
  std::string name;
  BaseType base = BaseType::kFixed;
  Pose mount;  // fixed-base placement in the world
  // Planar base DoF (x, y, theta) limits and velocity caps.
  Eigen::Vector3d base_lower = Eigen::Vector3d(-10, -10, -3.14159);
  Eigen::Vector3d base_upper = Eigen::Vector3d(10, 10, 3.14159);
  Eigen::Vector3d base_vmax = Eigen::Vector3d(0.5, 0.5, 1.0);
  std::vector<Joint> joints;
  std::vector<CollisionSphere> spheres;

  int base_dof() const { return base == BaseType::kPlanarHolonomic ? 3 : 0; }
  int dof() const { return base_dof() + static_cast<int>(joints.size()); }
  int num_frames() const { return static_cast<int>(joints.size()) + 1; }

  VecX lower() const;
  VecX upper() const;
  VecX vmax() const;
  double max_radius() const;
  bool within_limits(const VecX& q) const;

  void validate() const;
  bool operator==(const RobotModel& o) const;
};

/// World-frame sphere centers, and optionally their 3×dof Jacobians.
struct SphereKinematics {
  std::vector<Vec3> centers;
  std::vector<Eigen::Matrix<double, 3, Eigen::Dynamic>> jacobians;
};

SphereKinematics sphere_kinematics(const RobotModel& model, const VecX& q, bool with_jacobians);

std::vector<Vec3> forward_kinematics(const RobotModel& model, const VecX& q);
std::vector<Eigen::Matrix<double, 3, Eigen::Dynamic>> sphere_jacobians(const RobotModel& model,
                                                                       const VecX& q);

/// World transform of every frame (base first).
std::vector<Eigen::Isometry3d> frame_transforms(const RobotModel& model, const VecX& q);

RobotModel make_nav2d();
RobotModel make_arm7();
RobotModel make_wholebody8();
std::vector<std::string> builtin_model_names();
RobotModel builtin_model(const std::string& name);

}  // namespace dfplan
