#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace dfplan {

using Vec3 = Eigen::Vector3d;
using Index3 = std::array<int, 3>;

/// Axis-aligned voxel lattice. Voxel (0,0,0) has its min corner at `origin`.
/// A grid with nz == 1 is treated as planar.
struct GridSpec {
  Vec3 origin = Vec3::Zero();
  double resolution = 0.05;
  Index3 dims{1, 1, 1};

  GridSpec() = default;
  GridSpec(const Vec3& o, double res, Index3 d) : origin(o), resolution(res), dims(d) {
    validate();
  }

  void validate() const {
    if (!(resolution > 0.0) || !std::isfinite(resolution))
      throw std::invalid_argument("GridSpec: resolution must be positive");
    for (int d : dims)
      if (d < 1) throw std::invalid_argument("GridSpec: dims must be >= 1");
  }

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  bool planar() const { return dims[2] == 1; }

  std::size_t linear(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  std::size_t linear(const Index3& v) const { return linear(v[0], v[1], v[2]); }

  Index3 unravel(std::size_t n) const {
    const auto nx = static_cast<std::size_t>(dims[0]);
    const auto ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(n % nx), static_cast<int>((n / nx) % ny),
            static_cast<int>(n / (nx * ny))};
  }

  bool contains(const Index3& v) const {
    return v[0] >= 0 && v[1] >= 0 && v[2] >= 0 && v[0] < dims[0] && v[1] < dims[1] &&
           v[2] < dims[2];
  }

  Vec3 center(int i, int j, int k) const {
    return origin + resolution * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  Vec3 center(const Index3& v) const { return center(v[0], v[1], v[2]); }

  /// Voxel containing `p` (may be out of bounds).
  Index3 voxel_of(const Vec3& p) const {
    const Vec3 g = (p - origin) / resolution;
    return {static_cast<int>(std::floor(g.x())), static_cast<int>(std::floor(g.y())),
            static_cast<int>(std::floor(g.z()))};
  }

  Vec3 min_corner() const { return origin; }
  Vec3 max_corner() const {
    return origin + resolution * Vec3(dims[0], dims[1], dims[2]);
  }

  /// Metric diagonal of the grid; used as the "no opposite class" distance.
  double diagonal() const {
    return resolution * std::sqrt(double(dims[0]) * dims[0] + double(dims[1]) * dims[1] +
                                  double(dims[2]) * dims[2]);
  }

  bool operator==(const GridSpec& o) const {
    return origin == o.origin && resolution == o.resolution && dims == o.dims;
  }
};

/// Immutable-by-convention occupancy mask over a GridSpec.
struct BinaryMask {
  GridSpec spec;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  explicit BinaryMask(const GridSpec& s, bool fill = false)
      : spec(s), bits(s.size(), fill ? 1 : 0) {}

  bool operator[](std::size_t n) const { return bits[n] != 0; }
  bool at(int i, int j, int k) const { return bits[spec.linear(i, j, k)] != 0; }
  void set(int i, int j, int k, bool v) { bits[spec.linear(i, j, k)] = v ? 1 : 0; }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto b : bits) c += b != 0;
    return c;
  }
  BinaryMask inverted() const {
    BinaryMask m(spec);
    for (std::size_t n = 0; n < bits.size(); ++n) m.bits[n] = bits[n] ? 0 : 1;
    return m;
  }
  bool operator==(const BinaryMask& o) const { return spec == o.spec && bits == o.bits; }
};

/// Named wall-clock durations, in milliseconds, in insertion order.
struct StageTimings {
  std::vector<std::pair<std::string, double>> stages;

  void add(const std::string& name, double ms) {
    for (auto& [n, v] : stages)
      if (n == name) {
        v += ms;
        return;
      }
    stages.emplace_back(name, ms);
  }
  double get(const std::string& name) const {
    for (const auto& [n, v] : stages)
      if (n == name) return v;
    return 0.0;
  }
  double total() const {
    double t = 0.0;
    for (const auto& s : stages) t += s.second;
    return t;
  }
  void merge(const StageTimings& o) {
    for (const auto& [n, v] : o.stages) add(n, v);
  }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace dfplan
