#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dfplan/grid.hpp"

// Exact squared Euclidean distance transform on voxel lattices, computed as
// three separable passes of the 1D lower-envelope-of-parabolas transform.
// Distances are in voxel units; every output is an integer-valued double.

namespace dfplan::edt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Backend { kSerial, kParallel };

/// 1D transform of `f` (stride 1) into `d`. `v` and `z` are scratch of
/// size n and n + 1. Entries of f equal to kInf are not sites.
void transform_1d(const double* f, int n, double* d, int* v, double* z);

/// Squared distance from every voxel to the nearest voxel whose `sites`
/// entry is nonzero; kInf everywhere when there is none.
void squared_edt_serial(std::span<const std::uint8_t> sites, const Index3& dims,
                        std::span<double> out);
void squared_edt_parallel(std::span<const std::uint8_t> sites, const Index3& dims,
                          std::span<double> out);

inline void squared_edt(std::span<const std::uint8_t> sites, const Index3& dims,
                        std::span<double> out, Backend backend) {
  if (backend == Backend::kSerial)
    squared_edt_serial(sites, dims, out);
  else
    squared_edt_parallel(sites, dims, out);
}

/// Threads the parallel backend will use.
int max_threads();

}  // namespace dfplan::edt
