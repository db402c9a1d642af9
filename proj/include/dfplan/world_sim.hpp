#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "dfplan/distance_field.hpp"
#include "dfplan/voxel_map.hpp"

namespace dfplan {

struct Waypoint {
  double time = 0.0;
  Vec3 center = Vec3::Zero();
  bool operator==(const Waypoint& o) const { return time == o.time && center == o.center; }
};

/// Shape moved along piecewise-linear waypoints; clamps outside the time span.
struct MovingObstacle {
  Shape shape;
  std::vector<Waypoint> waypoints;

  Vec3 center_at(double t) const;
  Shape at(double t) const { return shape_at(shape, center_at(t)); }
  void validate() const;
  bool operator==(const MovingObstacle& o) const {
    return shape == o.shape && waypoints == o.waypoints;
  }
};

enum class SensingMode { kOmniscient, kRaycast };

struct SensorPose {
  double time = 0.0;
  Vec3 origin = Vec3::Zero();
  bool operator==(const SensorPose& o) const { return time == o.time && origin == o.origin; }
};

/// Synthetic depth sensor: a fixed fan of rays from a scheduled origin.
struct RaycastSensor {
  std::vector<SensorPose> schedule;
  int azimuth_rays = 120;
  int elevation_rays = 40;
  double elevation_min = -1.2;  // rad
  double elevation_max = 0.5;   // rad
  double max_range = 6.0;
  double floor_band = 0.03;
  double initial_logodds = -0.4;

  Vec3 origin_at(double t) const;
  bool operator==(const RaycastSensor&) const = default;
};

struct WorldConfig {
  GridSpec grid;
  OccupancyParams occupancy;
  FieldKind kind = FieldKind::kSigned;
  std::vector<Shape> static_obstacles;
  std::vector<MovingObstacle> moving_obstacles;
  SensingMode sensing = SensingMode::kOmniscient;
  RaycastSensor sensor;

  void validate() const;
  bool operator==(const WorldConfig& o) const {
    return grid == o.grid && occupancy == o.occupancy && kind == o.kind &&
           static_obstacles == o.static_obstacles && moving_obstacles == o.moving_obstacles &&
           sensing == o.sensing && sensor == o.sensor;
  }
};

struct WorldStep {
  std::shared_ptr<const DistanceField> field;
  bool changed = false;
  StageTimings timings;
  double clock = 0.0;
};

/// Deterministic scene: static shapes plus scripted movers, re-rasterized (or
/// re-sensed) every step. A new field is published only when occupancy changed.
class WorldSim {
 public:
  explicit WorldSim(WorldConfig config, BuildOptions build = {});

  WorldStep step(double dt);

  double clock() const { return clock_; }
  const WorldConfig& config() const { return config_; }
  std::shared_ptr<const DistanceField> field() const { return publisher_.latest(); }
  const FieldPublisher& publisher() const { return publisher_; }
  const OccupancyGrid& grid() const { return grid_; }
  const BinaryMask& mask() const { return mask_; }

  /// Every shape posed at time t.
  std::vector<Shape> shapes_at(double t) const;
  /// Per-voxel point-in-shape union at time t.
  BinaryMask truth_mask(double t) const;
  /// Synthetic point cloud seen from the scheduled sensor origin at time t.
  PointCloudFrame synthesize_frame(double t) const;

 private:
  WorldStep update(bool first);

  WorldConfig config_;
  BuildOptions build_;
  OccupancyGrid grid_;
  BinaryMask mask_;
  FieldPublisher publisher_;
  double clock_ = 0.0;
};

/// Ray parameter of the first intersection of origin + t·dir (t ≥ 0) with a shape.
std::optional<double> ray_intersect(const Shape& shape, const Vec3& origin, const Vec3& dir);

/// FNV-1a over raw bytes.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 14695981039346656037ull);
std::uint64_t field_hash(const DistanceField& field);

}  // namespace dfplan
