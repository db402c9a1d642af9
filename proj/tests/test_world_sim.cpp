#include <gtest/gtest.h>

#include "dfplan/world_sim.hpp"

using namespace dfplan;

namespace {

WorldConfig base_config() {
  WorldConfig c;
  c.grid = GridSpec{Vec3(-1, -1, 0), 0.05, {40, 40, 24}};
  c.static_obstacles = {Cuboid{Vec3(0.4, 0.4, 0.3), Vec3(0.1, 0.15, 0.3)}};
  return c;
}

MovingObstacle crossing() {
  MovingObstacle m;
  m.shape = Cylinder{Vec3::Zero(), 0.12, 0.6};
  m.waypoints = {{0.0, Vec3(-0.6, 0.0, 0.3)}, {2.0, Vec3(0.4, 0.0, 0.3)}};
  return m;
}

}  // namespace

TEST(MovingObstacle, WaypointsAndLinearInterpolation) {
  MovingObstacle m = crossing();
  m.waypoints = {{0.0, Vec3(0, 0, 0)}, {2.0, Vec3(1, 0, 0)}, {3.0, Vec3(1, 2, 0)}};
  EXPECT_EQ(m.center_at(0.0), Vec3(0, 0, 0));
  EXPECT_EQ(m.center_at(2.0), Vec3(1, 0, 0));
  EXPECT_EQ(m.center_at(3.0), Vec3(1, 2, 0));
  EXPECT_DOUBLE_EQ(m.center_at(1.0).x(), 0.5);
  EXPECT_EQ(m.center_at(-4.0), Vec3(0, 0, 0));
  EXPECT_EQ(m.center_at(9.0), Vec3(1, 2, 0));
  EXPECT_EQ(shape_center(m.at(2.0)), Vec3(1, 0, 0));
}

TEST(MovingObstacle, RejectsNonIncreasingTimes) {
  MovingObstacle m = crossing();
  m.waypoints[1].time = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(WorldSim, StaticWorldCachesField) {
  WorldSim w(base_config());
  const auto first = w.field();
  ASSERT_NE(first, nullptr);
  for (int i = 0; i < 5; ++i) {
    const WorldStep s = w.step(0.1);
    EXPECT_FALSE(s.changed);
    EXPECT_EQ(s.field, first);
  }
  EXPECT_NEAR(w.clock(), 0.5, 1e-12);
  EXPECT_THROW(w.step(0.0), std::invalid_argument);
}

TEST(WorldSim, MovingObstacleRepublishesOnChange) {
  WorldConfig c = base_config();
  c.moving_obstacles = {crossing()};
  WorldSim w(c);
  const auto v0 = w.publisher().version();
  const WorldStep s = w.step(0.25);
  EXPECT_TRUE(s.changed);
  EXPECT_NE(s.field, nullptr);
  EXPECT_EQ(w.publisher().version(), v0 + 1);
  // After the last waypoint the mover stops and the field stays put.
  w.step(3.0);
  const WorldStep still = w.step(0.1);
  EXPECT_FALSE(still.changed);
}

TEST(WorldSim, OccupancyEqualsShapeUnionOracle) {
  WorldConfig c = base_config();
  c.moving_obstacles = {crossing()};
  WorldSim w(c);
  for (int i = 0; i < 10; ++i) {
    w.step(0.23);
    const BinaryMask truth = w.truth_mask(w.clock());
    EXPECT_EQ(w.mask(), truth) << "t=" << w.clock();
    // Signed field is negative exactly on the truth mask.
    const auto f = w.field();
    for (std::size_t n = 0; n < truth.bits.size(); ++n) ASSERT_EQ(f->value(n) < 0.0, truth[n]);
  }
}

TEST(WorldSim, DeterministicFieldSequence) {
  WorldConfig c = base_config();
  c.moving_obstacles = {crossing()};
  WorldSim a(c), b(c);
  for (int i = 0; i < 8; ++i) {
    a.step(0.3);
    b.step(0.3);
    EXPECT_EQ(field_hash(*a.field()), field_hash(*b.field()));
  }
}

TEST(WorldSim, UnsignedKindRespected) {
  WorldConfig c = base_config();
  c.kind = FieldKind::kUnsigned;
  WorldSim w(c);
  for (double v : w.field()->values()) ASSERT_GE(v, 0.0);
}

TEST(RayIntersect, CuboidAndCylinder) {
  const Shape box = Cuboid{Vec3(2, 0, 0), Vec3(0.5, 0.5, 0.5)};
  EXPECT_NEAR(*ray_intersect(box, Vec3::Zero(), Vec3::UnitX()), 1.5, 1e-12);
  EXPECT_FALSE(ray_intersect(box, Vec3::Zero(), -Vec3::UnitX()).has_value());
  const Shape cyl = Cylinder{Vec3(0, 3, 0), 1.0, 2.0};
  EXPECT_NEAR(*ray_intersect(cyl, Vec3::Zero(), Vec3::UnitY()), 2.0, 1e-12);
  EXPECT_NEAR(*ray_intersect(cyl, Vec3(0, 3, 5), -Vec3::UnitZ()), 4.0, 1e-12);
  EXPECT_FALSE(ray_intersect(cyl, Vec3(0, 3, 5), Vec3::UnitX()).has_value());
}

TEST(WorldSim, RaycastModeSeesObstaclesButNotTheFloor) {
  WorldConfig c = base_config();
  c.sensing = SensingMode::kRaycast;
  c.sensor.schedule = {{0.0, Vec3(-0.5, -0.5, 0.6)}};
  c.sensor.azimuth_rays = 240;
  c.sensor.elevation_rays = 80;
  WorldSim w(c);
  for (int i = 0; i < 4; ++i) w.step(0.1);
  const BinaryMask& m = w.mask();
  const BinaryMask truth = w.truth_mask(w.clock());
  std::size_t hit_true = 0, floor_occupied = 0;
  for (std::size_t n = 0; n < m.bits.size(); ++n) {
    const auto v = c.grid.unravel(n);
    if (m[n] && v[2] == 0 && !truth[n]) ++floor_occupied;
    if (m[n] && truth[n]) ++hit_true;
  }
  EXPECT_GT(hit_true, 10u);
  EXPECT_EQ(floor_occupied, 0u);
  EXPECT_GT(w.grid().stats().floor_points, 0u);
}
