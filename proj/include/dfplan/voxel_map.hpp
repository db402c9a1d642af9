#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "dfplan/grid.hpp"

namespace dfplan {

struct Cuboid {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(0.5);

  /// Closed point-in-box test.
  bool contains(const Vec3& p) const {
    return ((p - center).cwiseAbs().array() <= half_extents.array()).all();
  }
  bool operator==(const Cuboid& o) const {
    return center == o.center && half_extents == o.half_extents;
  }
};

/// Vertical (z-aligned) cylinder; `center` is its geometric center.
struct Cylinder {
  Vec3 center = Vec3::Zero();
  double radius = 0.1;
  double height = 1.0;

  bool contains(const Vec3& p) const {
    const double dx = p.x() - center.x(), dy = p.y() - center.y();
    return dx * dx + dy * dy <= radius * radius && std::abs(p.z() - center.z()) <= 0.5 * height;
  }
  bool operator==(const Cylinder& o) const {
    return center == o.center && radius == o.radius && height == o.height;
  }
};

using Shape = std::variant<Cuboid, Cylinder>;

bool shape_contains(const Shape& s, const Vec3& p);
Shape shape_at(const Shape& s, const Vec3& center);
Vec3 shape_center(const Shape& s);
void validate_shape(const Shape& s);

struct OccupancyParams {
  double hit_delta = 0.85;
  double miss_delta = -0.4;
  double clamp_min = -2.0;
  double clamp_max = 3.5;
  double occupied_threshold = 0.0;

  void validate() const;
  bool operator==(const OccupancyParams&) const = default;
};

struct PointCloudFrame {
  Vec3 sensor_origin = Vec3::Zero();
  std::vector<Vec3> points;
  double timestamp = 0.0;
};

struct IntegrationStats {
  std::size_t rays = 0;
  std::size_t zero_length_rays = 0;
  std::size_t floor_points = 0;
  std::size_t hits_applied = 0;
  std::size_t misses_applied = 0;
};

enum class RasterMode { kOccupied, kFree };

/// Log-odds voxel map. Values always stay in [clamp_min, clamp_max].
class OccupancyGrid {
 public:
  OccupancyGrid(const GridSpec& spec, const OccupancyParams& params = {},
                double initial_logodds = 0.0);

  const GridSpec& spec() const { return spec_; }
  const OccupancyParams& params() const { return params_; }

  double logodds(std::size_t n) const { return logodds_[n]; }
  double logodds(int i, int j, int k) const { return logodds_[spec_.linear(i, j, k)]; }
  void set_logodds(std::size_t n, double v);
  void fill(double v);

  bool occupied(std::size_t n) const { return logodds_[n] >= threshold_; }

  /// Rays from the sensor clear every traversed voxel; each endpoint voxel
  /// gets a hit unless the point lies at or below `floor_band` (world z).
  /// Updates within one frame are applied as sets, so the result does not
  /// depend on point order. A voxel hit in the frame is never also cleared.
  StageTimings integrate_cloud(const PointCloudFrame& frame, double floor_band);

  void rasterize(const Shape& shape, RasterMode mode);
  void rasterize_cuboid(const Cuboid& c, RasterMode mode) { rasterize(Shape{c}, mode); }

  BinaryMask occupancy_snapshot() const;

  const IntegrationStats& stats() const { return stats_; }

 private:
  double clamp(double v) const;

  GridSpec spec_;
  OccupancyParams params_;
  double threshold_;
  std::vector<double> logodds_;
  IntegrationStats stats_;
};

/// Voxels visited by the segment a→b, in traversal order, clipped to the
/// grid. The voxel containing b (if inside) is the last element when
/// `include_end` is set.
std::vector<Index3> traverse_ray(const GridSpec& spec, const Vec3& a, const Vec3& b,
                                 bool include_end);

}  // namespace dfplan
