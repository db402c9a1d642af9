#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dfplan/voxel_map.hpp"
#include "oracles.hpp"

using namespace dfplan;

namespace {

GridSpec cube(int n, double res = 0.1) { return GridSpec{Vec3::Zero(), res, {n, n, n}}; }

}  // namespace

TEST(GridSpec, CenterAndLinearIndex) {
  GridSpec s{Vec3(1, 2, 3), 0.5, {4, 3, 2}};
  EXPECT_EQ(s.size(), 24u);
  EXPECT_TRUE(s.center(0, 0, 0).isApprox(Vec3(1.25, 2.25, 3.25)));
  EXPECT_EQ(s.linear(1, 0, 0), 1u);
  EXPECT_EQ(s.linear(0, 1, 0), 4u);
  EXPECT_EQ(s.linear(0, 0, 1), 12u);
  for (std::size_t n = 0; n < s.size(); ++n) {
    const auto v = s.unravel(n);
    EXPECT_EQ(s.linear(v[0], v[1], v[2]), n);
  }
  EXPECT_THROW((GridSpec{Vec3::Zero(), 0.0, {1, 1, 1}}.validate()), std::invalid_argument);
  EXPECT_THROW((GridSpec{Vec3::Zero(), 1.0, {0, 1, 1}}.validate()), std::invalid_argument);
}

TEST(IntegrateCloud, SingleRayHitsEndpointAndClearsTraversed) {
  OccupancyGrid g(cube(16));
  PointCloudFrame f;
  f.sensor_origin = g.spec().center(2, 8, 8);
  f.points = {g.spec().center(7, 8, 8)};
  g.integrate_cloud(f, 0.0);
  const auto& p = g.params();
  EXPECT_DOUBLE_EQ(g.logodds(7, 8, 8), p.hit_delta);
  for (int i = 2; i < 7; ++i) EXPECT_DOUBLE_EQ(g.logodds(i, 8, 8), std::max(p.miss_delta, p.clamp_min)) << i;
  EXPECT_DOUBLE_EQ(g.logodds(8, 8, 8), 0.0);
  EXPECT_DOUBLE_EQ(g.logodds(1, 8, 8), 0.0);
}

TEST(IntegrateCloud, FloorBandPointsClearButDoNotHit) {
  OccupancyGrid g(cube(16));
  PointCloudFrame f;
  f.sensor_origin = Vec3(0.25, 0.85, 0.01);
  f.points = {Vec3(0.75, 0.85, 0.01)};
  g.integrate_cloud(f, 0.03);
  EXPECT_DOUBLE_EQ(g.logodds(7, 8, 0), 0.0);
  for (int i = 2; i < 7; ++i) EXPECT_DOUBLE_EQ(g.logodds(i, 8, 0), g.params().miss_delta);
  EXPECT_EQ(g.stats().floor_points, 1u);
  EXPECT_EQ(g.stats().hits_applied, 0u);
}

TEST(IntegrateCloud, RepeatedHitsSaturateAtClampMax) {
  OccupancyGrid g(cube(8));
  PointCloudFrame f;
  f.sensor_origin = g.spec().center(0, 4, 4);
  f.points = {g.spec().center(6, 4, 4)};
  for (int r = 0; r < 20; ++r) {
    g.integrate_cloud(f, 0.0);
    EXPECT_LE(g.logodds(6, 4, 4), g.params().clamp_max);
  }
  EXPECT_DOUBLE_EQ(g.logodds(6, 4, 4), g.params().clamp_max);
  EXPECT_DOUBLE_EQ(g.logodds(3, 4, 4), g.params().clamp_min);
}

TEST(IntegrateCloud, ZeroLengthRaysAreCounted) {
  OccupancyGrid g(cube(8));
  PointCloudFrame f;
  f.sensor_origin = Vec3(0.4, 0.4, 0.4);
  f.points = {f.sensor_origin, Vec3(0.75, 0.4, 0.4)};
  g.integrate_cloud(f, 0.0);
  EXPECT_EQ(g.stats().zero_length_rays, 1u);
  EXPECT_EQ(g.stats().rays, 2u);
}

TEST(IntegrateCloud, RejectsNonFiniteInputAndNegativeBand) {
  OccupancyGrid g(cube(8));
  PointCloudFrame f;
  f.points = {Vec3(std::nan(""), 0, 0)};
  EXPECT_THROW(g.integrate_cloud(f, 0.0), std::invalid_argument);
  f.points = {Vec3(0.1, 0.1, 0.1)};
  EXPECT_THROW(g.integrate_cloud(f, -0.1), std::invalid_argument);
}

TEST(IntegrateCloud, RecordsStageTimings) {
  OccupancyGrid g(cube(8));
  PointCloudFrame f;
  f.sensor_origin = Vec3(0.05, 0.05, 0.05);
  f.points = {Vec3(0.7, 0.7, 0.7)};
  const StageTimings t = g.integrate_cloud(f, 0.0);
  EXPECT_GE(t.get("transform"), 0.0);
  EXPECT_GE(t.get("raycast"), 0.0);
  EXPECT_EQ(t.stages.size(), 3u);
}

TEST(IntegrateCloud, OrderIndependentWithinFrame) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 2.1);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloudFrame f;
    f.sensor_origin = Vec3(0.8, 0.8, 0.8);
    for (int i = 0; i < 60; ++i) f.points.emplace_back(u(rng), u(rng), u(rng));
    OccupancyGrid a(cube(16)), b(cube(16));
    a.integrate_cloud(f, 0.05);
    std::shuffle(f.points.begin(), f.points.end(), rng);
    b.integrate_cloud(f, 0.05);
    for (std::size_t n = 0; n < a.spec().size(); ++n) ASSERT_EQ(a.logodds(n), b.logodds(n));
  }
}

TEST(IntegrateCloud, LogoddsStayWithinClampsUnderRandomSequences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.3, 1.9);
  OccupancyGrid g(cube(12, 0.15));
  for (int frame = 0; frame < 40; ++frame) {
    PointCloudFrame f;
    f.sensor_origin = Vec3(u(rng), u(rng), u(rng));
    for (int i = 0; i < 40; ++i) f.points.emplace_back(u(rng), u(rng), u(rng));
    g.integrate_cloud(f, 0.03);
    if (frame % 7 == 0) g.rasterize_cuboid({Vec3(u(rng), u(rng), u(rng)), Vec3(0.2, 0.3, 0.1)}, RasterMode::kOccupied);
    for (std::size_t n = 0; n < g.spec().size(); ++n) {
      ASSERT_GE(g.logodds(n), g.params().clamp_min);
      ASSERT_LE(g.logodds(n), g.params().clamp_max);
    }
  }
}

TEST(TraverseRay, VisitsContiguousVoxelsAndEndsAtEndpoint) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.59);
  const GridSpec s = cube(16);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    const auto cells = traverse_ray(s, a, b, true);
    ASSERT_FALSE(cells.empty());
    EXPECT_EQ(cells.front(), s.voxel_of(a));
    EXPECT_EQ(cells.back(), s.voxel_of(b));
    for (std::size_t i = 1; i < cells.size(); ++i) {
      int step = 0;
      for (int ax = 0; ax < 3; ++ax) step += std::abs(cells[i][ax] - cells[i - 1][ax]);
      EXPECT_EQ(step, 1);
    }
  }
}

TEST(TraverseRay, ClipsToGrid) {
  const GridSpec s = cube(8);
  const auto cells = traverse_ray(s, Vec3(-1.0, 0.45, 0.45), Vec3(2.0, 0.45, 0.45), true);
  ASSERT_EQ(cells.size(), 8u);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(cells[i], (Index3{i, 4, 4}));
  EXPECT_TRUE(traverse_ray(s, Vec3(-1, -1, -1), Vec3(-2, 5, 5), true).empty());
}

TEST(Rasterize, CuboidCoveringThreeCubedCenters) {
  // Unit voxels keep the closed faces exactly on the outer centers.
  OccupancyGrid g(cube(10, 1.0), {}, -2.0);
  g.rasterize_cuboid({g.spec().center(4, 4, 4), Vec3::Constant(1.0)}, RasterMode::kOccupied);
  const BinaryMask m = g.occupancy_snapshot();
  EXPECT_EQ(m.count(), 27u);
  EXPECT_TRUE(m.at(3, 3, 3) && m.at(5, 5, 5));
}

TEST(Rasterize, CuboidOutsideGridIsNoOp) {
  OccupancyGrid g(cube(10), {}, -1.0);
  g.rasterize_cuboid({Vec3(5, 5, 5), Vec3::Constant(0.5)}, RasterMode::kOccupied);
  for (std::size_t n = 0; n < g.spec().size(); ++n) EXPECT_EQ(g.logodds(n), -1.0);
}

TEST(Rasterize, FreeModeSetsClampMin) {
  OccupancyGrid g(cube(6), {}, 1.0);
  g.rasterize_cuboid({Vec3(0.3, 0.3, 0.3), Vec3::Constant(0.1)}, RasterMode::kFree);
  EXPECT_EQ(g.logodds(2, 2, 2), g.params().clamp_min);
  EXPECT_EQ(g.logodds(0, 0, 0), 1.0);
}

TEST(Rasterize, UnionMatchesPointInShapeOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-0.2, 1.8), ext(0.02, 0.5);
  const GridSpec s{Vec3(0, 0, 0), 0.1, {16, 16, 12}};
  for (int trial = 0; trial < 50; ++trial) {
    OccupancyGrid g(s, {}, -2.0);
    std::vector<Shape> shapes;
    for (int k = 0; k < 3; ++k) {
      if (k == 2)
        shapes.push_back(Cylinder{Vec3(pos(rng), pos(rng), pos(rng)), ext(rng), 2 * ext(rng)});
      else
        shapes.push_back(Cuboid{Vec3(pos(rng), pos(rng), pos(rng)), Vec3(ext(rng), ext(rng), ext(rng))});
      g.rasterize(shapes.back(), RasterMode::kOccupied);
    }
    const BinaryMask m = g.occupancy_snapshot();
    for (std::size_t n = 0; n < s.size(); ++n) {
      const Vec3 c = s.center(s.unravel(n));
      bool inside = false;
      for (const auto& sh : shapes) inside = inside || shape_contains(sh, c);
      ASSERT_EQ(m[n], inside);
    }
  }
}

TEST(Snapshot, ThresholdIsClosedAndSnapshotIsAValue) {
  OccupancyGrid g(cube(4), {}, -2.0);
  EXPECT_EQ(g.occupancy_snapshot().count(), 0u);
  g.set_logodds(5, g.params().occupied_threshold);
  const BinaryMask m = g.occupancy_snapshot();
  EXPECT_EQ(m.count(), 1u);
  EXPECT_TRUE(m[5]);
  g.set_logodds(6, 3.5);
  EXPECT_EQ(m.count(), 1u);
  EXPECT_EQ(g.occupancy_snapshot().count(), 2u);
}

TEST(Snapshot, SingleMaxVoxel) {
  OccupancyGrid g(cube(4), {}, -2.0);
  g.set_logodds(g.spec().linear(1, 2, 3), 3.5);
  const BinaryMask m = g.occupancy_snapshot();
  EXPECT_EQ(m.count(), 1u);
  EXPECT_TRUE(m.at(1, 2, 3));
}

TEST(OccupancyParams, RejectsInconsistentClamps) {
  OccupancyParams p;
  p.clamp_min = 1.0;
  p.clamp_max = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
