#include "dfplan/world_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfplan {

namespace {

Vec3 piecewise_linear(double t, const std::vector<double>& times, const std::vector<Vec3>& points) {
  if (t <= times.front()) return points.front();
  if (t >= times.back()) return points.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  if (t == times[lo]) return points[lo];
  const double a = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - a) * points[lo] + a * points[hi];
}

}  // namespace

Vec3 MovingObstacle::center_at(double t) const {
  std::vector<double> times;
  std::vector<Vec3> points;
  for (const auto& w : waypoints) {
    times.push_back(w.time);
    points.push_back(w.center);
  }
  return piecewise_linear(t, times, points);
}

void MovingObstacle::validate() const {
  validate_shape(shape);
  if (waypoints.empty()) throw std::invalid_argument("moving obstacle needs at least one waypoint");
  for (std::size_t i = 1; i < waypoints.size(); ++i)
    if (!(waypoints[i].time > waypoints[i - 1].time))
      throw std::invalid_argument("moving obstacle waypoint times must be strictly increasing");
}

Vec3 RaycastSensor::origin_at(double t) const {
  if (schedule.empty()) throw std::invalid_argument("raycast sensor has an empty pose schedule");
  std::vector<double> times;
  std::vector<Vec3> points;
  for (const auto& p : schedule) {
    times.push_back(p.time);
    points.push_back(p.origin);
  }
  return piecewise_linear(t, times, points);
}

void WorldConfig::validate() const {
  grid.validate();
  occupancy.validate();
  for (const auto& s : static_obstacles) validate_shape(s);
  for (const auto& m : moving_obstacles) m.validate();
  if (sensing == SensingMode::kRaycast) {
    if (sensor.schedule.empty()) throw std::invalid_argument("raycast sensing needs a sensor schedule");
    for (std::size_t i = 1; i < sensor.schedule.size(); ++i)
      if (!(sensor.schedule[i].time > sensor.schedule[i - 1].time))
        throw std::invalid_argument("sensor schedule times must be strictly increasing");
    if (sensor.azimuth_rays < 1 || sensor.elevation_rays < 1 || !(sensor.max_range > 0.0) ||
        !(sensor.floor_band >= 0.0))
      throw std::invalid_argument("invalid raycast sensor parameters");
  }
}

std::optional<double> ray_intersect(const Shape& shape, const Vec3& origin, const Vec3& dir) {
  if (const auto* c = std::get_if<Cuboid>(&shape)) {
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    for (int ax = 0; ax < 3; ++ax) {
      const double lo = c->center[ax] - c->half_extents[ax];
      const double hi = c->center[ax] + c->half_extents[ax];
      if (dir[ax] == 0.0) {
        if (origin[ax] < lo || origin[ax] > hi) return std::nullopt;
        continue;
      }
      double a = (lo - origin[ax]) / dir[ax], b = (hi - origin[ax]) / dir[ax];
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
      if (t0 > t1) return std::nullopt;
    }
    return t0;
  }
  const auto& cy = std::get<Cylinder>(shape);
  const double zlo = cy.center.z() - 0.5 * cy.height, zhi = cy.center.z() + 0.5 * cy.height;
  std::optional<double> best;
  const auto consider = [&](double t) {
    if (t < 0.0) return;
    const Vec3 p = origin + t * dir;
    const double dx = p.x() - cy.center.x(), dy = p.y() - cy.center.y();
    if (dx * dx + dy * dy <= cy.radius * cy.radius * (1.0 + 1e-12) && p.z() >= zlo - 1e-12 &&
        p.z() <= zhi + 1e-12)
      if (!best || t < *best) best = t;
  };
  if (cy.contains(origin)) return 0.0;
  const double ox = origin.x() - cy.center.x(), oy = origin.y() - cy.center.y();
  const double a = dir.x() * dir.x() + dir.y() * dir.y();
  if (a > 0.0) {
    const double b = 2.0 * (ox * dir.x() + oy * dir.y());
    const double c = ox * ox + oy * oy - cy.radius * cy.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      consider((-b - sq) / (2.0 * a));
      consider((-b + sq) / (2.0 * a));
    }
  }
  if (dir.z() != 0.0) {
    consider((zlo - origin.z()) / dir.z());
    consider((zhi - origin.z()) / dir.z());
  }
  return best;
}

WorldSim::WorldSim(WorldConfig config, BuildOptions build)
    : config_(std::move(config)),
      build_(build),
      grid_(config_.grid, config_.occupancy,
            config_.sensing == SensingMode::kRaycast ? config_.sensor.initial_logodds
                                                     : config_.occupancy.clamp_min) {
  config_.validate();
  update(true);
}

std::vector<Shape> WorldSim::shapes_at(double t) const {
  std::vector<Shape> out = config_.static_obstacles;
  for (const auto& m : config_.moving_obstacles) out.push_back(m.at(t));
  return out;
}

BinaryMask WorldSim::truth_mask(double t) const {
  const auto shapes = shapes_at(t);
  const GridSpec& spec = config_.grid;
  BinaryMask m(spec);
  for (std::size_t n = 0; n < spec.size(); ++n) {
    const Vec3 c = spec.center(spec.unravel(n));
    for (const auto& s : shapes)
      if (shape_contains(s, c)) {
        m.bits[n] = 1;
        break;
      }
  }
  return m;
}

PointCloudFrame WorldSim::synthesize_frame(double t) const {
  const RaycastSensor& sensor = config_.sensor;
  PointCloudFrame frame;
  frame.timestamp = t;
  frame.sensor_origin = sensor.origin_at(t);
  const auto shapes = shapes_at(t);
  const double push = 0.5 * config_.grid.resolution;
  const double far = 1e3;
  for (int e = 0; e < sensor.elevation_rays; ++e) {
    const double el = sensor.elevation_rays == 1
                          ? sensor.elevation_min
                          : sensor.elevation_min + (sensor.elevation_max - sensor.elevation_min) * e /
                                                       (sensor.elevation_rays - 1);
    for (int a = 0; a < sensor.azimuth_rays; ++a) {
      const double az = 2.0 * M_PI * a / sensor.azimuth_rays;
      const Vec3 dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      double best = std::numeric_limits<double>::infinity();
      bool floor_hit = false;
      for (const auto& s : shapes)
        if (auto hit = ray_intersect(s, frame.sensor_origin, dir); hit && *hit < best) best = *hit;
      if (dir.z() < 0.0) {
        const double tf = -frame.sensor_origin.z() / dir.z();
        if (tf >= 0.0 && tf < best) {
          best = tf;
          floor_hit = true;
        }
      }
      if (best > sensor.max_range) {
        // No return: clear along the ray, never mark a hit.
        frame.points.push_back(frame.sensor_origin + far * dir);
        continue;
      }
      Vec3 p = frame.sensor_origin + best * dir;
      if (floor_hit)
        p.z() = 0.0;
      else
        p += push * dir;
      frame.points.push_back(p);
    }
  }
  return frame;
}

WorldStep WorldSim::update(bool first) {
  WorldStep out;
  out.clock = clock_;
  Stopwatch sw;
  if (!first && config_.moving_obstacles.empty() && config_.sensing == SensingMode::kOmniscient) {
    out.field = publisher_.latest();
    return out;
  }
  if (config_.sensing == SensingMode::kOmniscient) {
    grid_.fill(config_.occupancy.clamp_min);
    for (const auto& s : shapes_at(clock_)) grid_.rasterize(s, RasterMode::kOccupied);
    out.timings.add("rasterize", sw.lap_ms());
  } else {
    const PointCloudFrame frame = synthesize_frame(clock_);
    out.timings.add("synthesize", sw.lap_ms());
    out.timings.merge(grid_.integrate_cloud(frame, config_.sensor.floor_band));
    sw.lap_ms();
  }
  BinaryMask mask = grid_.occupancy_snapshot();
  out.timings.add("snapshot", sw.lap_ms());
  out.changed = first || !(mask == mask_);
  if (out.changed) {
    mask_ = std::move(mask);
    auto field = std::make_shared<const DistanceField>(compute_field(mask_, config_.kind, build_));
    out.timings.merge(field->timings());
    publisher_.publish(field);
    sw.lap_ms();
  }
  out.field = publisher_.latest();
  return out;
}

WorldStep WorldSim::step(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("WorldSim::step: dt must be > 0");
  clock_ += dt;
  return update(false);
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t field_hash(const DistanceField& field) {
  const auto& v = field.values();
  std::uint64_t h = fnv1a(v.data(), v.size() * sizeof(double));
  const int kind = field.kind() == FieldKind::kSigned ? 1 : 0;
  return fnv1a(&kind, sizeof(kind), h);
}

}  // namespace dfplan
