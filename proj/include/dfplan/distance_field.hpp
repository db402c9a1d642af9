#pragma once

#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dfplan/edt.hpp"
#include "dfplan/grid.hpp"

namespace dfplan {

enum class FieldKind { kUnsigned, kSigned };

const char* to_string(FieldKind k);
FieldKind field_kind_from_string(const std::string& s);

struct FieldQuery {
  Vec3 point = Vec3::Zero();  // the (possibly clamped) point that was interpolated
  double distance = 0.0;
  Vec3 gradient = Vec3::Zero();
  bool clamped = false;
};

/// Metric distances sampled at voxel centers. Immutable once built.
class DistanceField {
 public:
  DistanceField(const GridSpec& spec, FieldKind kind, std::vector<double> values,
                StageTimings timings = {});

  const GridSpec& spec() const { return spec_; }
  FieldKind kind() const { return kind_; }
  const std::vector<double>& values() const { return values_; }
  double value(int i, int j, int k) const { return values_[spec_.linear(i, j, k)]; }
  double value(std::size_t n) const { return values_[n]; }
  const StageTimings& timings() const { return timings_; }

  /// Trilinear interpolation over voxel centers (bilinear when planar).
  /// Points outside the center lattice are clamped onto it; the gradient
  /// component along a clamped axis is zero.
  FieldQuery query(const Vec3& p) const;
  double distance(const Vec3& p) const { return query(p).distance; }

 private:
  GridSpec spec_;
  FieldKind kind_;
  std::vector<double> values_;
  StageTimings timings_;
};

struct BuildOptions {
  edt::Backend backend = edt::Backend::kParallel;
  /// Clamp |value| to this radius when set.
  std::optional<double> truncation;
};

DistanceField compute_usdf(const BinaryMask& mask, const BuildOptions& opts = {});
DistanceField compute_sdf(const BinaryMask& mask, const BuildOptions& opts = {});
DistanceField compute_field(const BinaryMask& mask, FieldKind kind, const BuildOptions& opts = {});

/// Latest complete field, swapped atomically. Readers never see a partial build.
class FieldPublisher {
 public:
  void publish(std::shared_ptr<const DistanceField> f) {
    std::lock_guard lock(mu_);
    field_ = std::move(f);
    ++version_;
  }
  std::shared_ptr<const DistanceField> latest() const {
    std::lock_guard lock(mu_);
    return field_;
  }
  std::uint64_t version() const {
    std::lock_guard lock(mu_);
    return version_;
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const DistanceField> field_;
  std::uint64_t version_ = 0;
};

// Build-time benchmarking.

struct TimingStat {
  double mean_ms = 0.0;
  double std_ms = 0.0;
  std::size_t samples = 0;
};

TimingStat summarize(const std::vector<double>& samples_ms);

struct BuildBenchResult {
  GridSpec spec;
  TimingStat unsigned_ms;
  TimingStat signed_ms;
  double ratio = 0.0;  // signed mean / unsigned mean
  StageTimings unsigned_stages;  // mean per stage
  StageTimings signed_stages;
};

/// Builds every mask once per requested kind (after one warm-up build each)
/// and reports per-kind timing statistics. Throws on an empty mask list.
BuildBenchResult benchmark_build(const std::vector<BinaryMask>& masks, bool run_unsigned,
                                 bool run_signed, const BuildOptions& opts = {});

// Debug dump: text header followed by raw little-endian float64 values in
// linear (x fastest) order.
void write_field_dump(std::ostream& os, const DistanceField& field);
DistanceField read_field_dump(std::istream& is);

}  // namespace dfplan
