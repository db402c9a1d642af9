#include <benchmark/benchmark.h>

#include <random>

#include "dfplan/distance_field.hpp"
#include "dfplan/voxel_map.hpp"

using namespace dfplan;

namespace {

// Cube of n³ voxels at 5 cm with a fixed set of random cuboids.
BinaryMask scene(int n) {
  const double res = 0.05;
  const double extent = n * res;
  OccupancyGrid g(GridSpec{Vec3::Zero(), res, {n, n, n}}, {}, -2.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(0.0, extent), size(0.05, 0.5);
  for (int k = 0; k < 20; ++k)
    g.rasterize_cuboid(Cuboid{Vec3(pos(rng), pos(rng), pos(rng)), Vec3(size(rng), size(rng), size(rng))},
                       RasterMode::kOccupied);
  return g.occupancy_snapshot();
}

template <bool Signed, edt::Backend B>
void BM_Field(benchmark::State& state) {
  const BinaryMask mask = scene(static_cast<int>(state.range(0)));
  BuildOptions opts;
  opts.backend = B;
  for (auto _ : state) {
    DistanceField f = Signed ? compute_sdf(mask, opts) : compute_usdf(mask, opts);
    benchmark::DoNotOptimize(f.values().data());
  }
  state.counters["voxels"] = static_cast<double>(mask.bits.size());
  state.counters["threads"] = B == edt::Backend::kParallel ? edt::max_threads() : 1;
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {32, 64, 128}) b->Arg(n);
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_Field<false, edt::Backend::kSerial>)->Name("usdf/serial")->Apply(sizes);
BENCHMARK(BM_Field<false, edt::Backend::kParallel>)->Name("usdf/openmp")->Apply(sizes);
BENCHMARK(BM_Field<true, edt::Backend::kSerial>)->Name("sdf/serial")->Apply(sizes);
BENCHMARK(BM_Field<true, edt::Backend::kParallel>)->Name("sdf/openmp")->Apply(sizes);

BENCHMARK_MAIN();
