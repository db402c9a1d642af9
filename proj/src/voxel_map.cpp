#include "dfplan/voxel_map.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace dfplan {

bool shape_contains(const Shape& s, const Vec3& p) {
  return std::visit([&](const auto& sh) { return sh.contains(p); }, s);
}

Shape shape_at(const Shape& s, const Vec3& center) {
  return std::visit(
      [&](auto sh) -> Shape {
        sh.center = center;
        return sh;
      },
      s);
}

Vec3 shape_center(const Shape& s) {
  return std::visit([](const auto& sh) { return sh.center; }, s);
}

namespace {

// Axis-aligned bounds of a shape.
std::pair<Vec3, Vec3> shape_bounds(const Shape& s) {
  if (const auto* c = std::get_if<Cuboid>(&s)) return {c->center - c->half_extents, c->center + c->half_extents};
  const auto& cy = std::get<Cylinder>(s);
  const Vec3 h(cy.radius, cy.radius, 0.5 * cy.height);
  return {cy.center - h, cy.center + h};
}

}  // namespace

void validate_shape(const Shape& s) {
  if (const auto* c = std::get_if<Cuboid>(&s)) {
    if (!c->center.allFinite() || !(c->half_extents.array() > 0.0).all())
      throw std::invalid_argument("cuboid half_extents must be strictly positive");
    return;
  }
  const auto& cy = std::get<Cylinder>(s);
  if (!cy.center.allFinite() || !(cy.radius > 0.0) || !(cy.height > 0.0))
    throw std::invalid_argument("cylinder radius and height must be strictly positive");
}

void OccupancyParams::validate() const {
  if (!(clamp_min <= clamp_max))
    throw std::invalid_argument("occupancy: clamp_min must not exceed clamp_max");
  if (!(hit_delta > 0.0) || !(miss_delta < 0.0))
    throw std::invalid_argument("occupancy: hit_delta must be > 0 and miss_delta < 0");
}

OccupancyGrid::OccupancyGrid(const GridSpec& spec, const OccupancyParams& params,
                             double initial_logodds)
    : spec_(spec), params_(params), threshold_(params.occupied_threshold) {
  spec_.validate();
  params_.validate();
  logodds_.assign(spec_.size(), clamp(initial_logodds));
}

double OccupancyGrid::clamp(double v) const {
  return std::clamp(v, params_.clamp_min, params_.clamp_max);
}

void OccupancyGrid::set_logodds(std::size_t n, double v) { logodds_[n] = clamp(v); }

void OccupancyGrid::fill(double v) { std::fill(logodds_.begin(), logodds_.end(), clamp(v)); }

std::vector<Index3> traverse_ray(const GridSpec& spec, const Vec3& a, const Vec3& b,
                                 bool include_end) {
  std::vector<Index3> out;
  const Vec3 ga = (a - spec.origin) / spec.resolution;
  const Vec3 gb = (b - spec.origin) / spec.resolution;
  const Vec3 d = gb - ga;

  // Clip the parametric segment ga + t*d, t in [0, 1], against [0, dims].
  double t_enter = 0.0, t_exit = 1.0;
  for (int ax = 0; ax < 3; ++ax) {
    const double lo = 0.0, hi = spec.dims[ax];
    if (d[ax] == 0.0) {
      if (ga[ax] < lo || ga[ax] >= hi) return out;
      continue;
    }
    double t0 = (lo - ga[ax]) / d[ax];
    double t1 = (hi - ga[ax]) / d[ax];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit) return out;

  const Vec3 start = ga + t_enter * d;
  Index3 v;
  for (int ax = 0; ax < 3; ++ax)
    v[ax] = std::clamp(static_cast<int>(std::floor(start[ax])), 0, spec.dims[ax] - 1);

  const Index3 end_voxel = {static_cast<int>(std::floor(gb.x())),
                            static_cast<int>(std::floor(gb.y())),
                            static_cast<int>(std::floor(gb.z()))};
  const bool end_inside = spec.contains(end_voxel);

  Index3 step{};
  Vec3 t_max, t_delta;
  const double inf = std::numeric_limits<double>::infinity();
  for (int ax = 0; ax < 3; ++ax) {
    if (d[ax] > 0.0) {
      step[ax] = 1;
      t_max[ax] = (v[ax] + 1 - ga[ax]) / d[ax];
      t_delta[ax] = 1.0 / d[ax];
    } else if (d[ax] < 0.0) {
      step[ax] = -1;
      t_max[ax] = (v[ax] - ga[ax]) / d[ax];
      t_delta[ax] = -1.0 / d[ax];
    } else {
      step[ax] = 0;
      t_max[ax] = inf;
      t_delta[ax] = inf;
    }
  }

  // Upper bound on visited voxels guards against float stalls.
  const std::size_t max_steps = static_cast<std::size_t>(spec.dims[0] + spec.dims[1] + spec.dims[2]) + 3;
  for (std::size_t n = 0; n < max_steps; ++n) {
    out.push_back(v);
    if (end_inside && v == end_voxel) break;
    int ax = 0;
    if (t_max[1] < t_max[ax]) ax = 1;
    if (t_max[2] < t_max[ax]) ax = 2;
    if (t_max[ax] > t_exit) break;
    v[ax] += step[ax];
    t_max[ax] += t_delta[ax];
    if (!spec.contains(v)) break;
  }

  if (end_inside) {
    std::erase(out, end_voxel);
    if (include_end) out.push_back(end_voxel);
  }
  return out;
}

StageTimings OccupancyGrid::integrate_cloud(const PointCloudFrame& frame, double floor_band) {
  if (!(floor_band >= 0.0)) throw std::invalid_argument("integrate_cloud: floor_band must be >= 0");
  if (!frame.sensor_origin.allFinite())
    throw std::invalid_argument("integrate_cloud: non-finite sensor origin");

  StageTimings timings;
  Stopwatch sw;

  struct Ray {
    Vec3 end;
    bool hit;
  };
  std::vector<Ray> rays;
  rays.reserve(frame.points.size());
  for (const Vec3& p : frame.points) {
    if (!p.allFinite()) throw std::invalid_argument("integrate_cloud: non-finite point");
    ++stats_.rays;
    if ((p - frame.sensor_origin).squaredNorm() == 0.0) {
      ++stats_.zero_length_rays;
      continue;
    }
    const bool floor = p.z() <= floor_band;
    stats_.floor_points += floor;
    rays.push_back({p, !floor});
  }
  timings.add("transform", sw.lap_ms());

  std::vector<std::size_t> hits, misses;
  for (const Ray& r : rays) {
    const auto voxels = traverse_ray(spec_, frame.sensor_origin, r.end, false);
    for (const auto& v : voxels) misses.push_back(spec_.linear(v));
    if (r.hit) {
      const Index3 e = spec_.voxel_of(r.end);
      if (spec_.contains(e)) hits.push_back(spec_.linear(e));
    }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  std::sort(misses.begin(), misses.end());
  misses.erase(std::unique(misses.begin(), misses.end()), misses.end());
  timings.add("raycast", sw.lap_ms());

  // Floor endpoints are excluded from both sets: cleared only if some other
  // ray passes through them.
  for (std::size_t n : misses) {
    if (std::binary_search(hits.begin(), hits.end(), n)) continue;
    logodds_[n] = clamp(logodds_[n] + params_.miss_delta);
    ++stats_.misses_applied;
  }
  for (std::size_t n : hits) {
    logodds_[n] = clamp(logodds_[n] + params_.hit_delta);
    ++stats_.hits_applied;
  }
  timings.add("update", sw.lap_ms());
  return timings;
}

void OccupancyGrid::rasterize(const Shape& shape, RasterMode mode) {
  const double value = mode == RasterMode::kOccupied ? params_.clamp_max : params_.clamp_min;
  const auto [lo, hi] = shape_bounds(shape);
  Index3 vlo, vhi;
  for (int ax = 0; ax < 3; ++ax) {
    // Candidate range padded by one voxel; the exact test below decides.
    const double glo = (lo[ax] - spec_.origin[ax]) / spec_.resolution - 0.5;
    const double ghi = (hi[ax] - spec_.origin[ax]) / spec_.resolution - 0.5;
    const double top = spec_.dims[ax] - 1;
    vlo[ax] = static_cast<int>(std::clamp(std::floor(glo) - 1.0, 0.0, top + 1.0));
    vhi[ax] = static_cast<int>(std::clamp(std::ceil(ghi) + 1.0, -1.0, top));
    if (vlo[ax] > vhi[ax]) return;
  }
  for (int k = vlo[2]; k <= vhi[2]; ++k)
    for (int j = vlo[1]; j <= vhi[1]; ++j)
      for (int i = vlo[0]; i <= vhi[0]; ++i)
        if (shape_contains(shape, spec_.center(i, j, k))) logodds_[spec_.linear(i, j, k)] = value;
}

BinaryMask OccupancyGrid::occupancy_snapshot() const {
  BinaryMask m(spec_);
  for (std::size_t n = 0; n < logodds_.size(); ++n) m.bits[n] = logodds_[n] >= threshold_ ? 1 : 0;
  return m;
}

}  // namespace dfplan
