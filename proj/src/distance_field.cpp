#include "dfplan/distance_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dfplan {

const char* to_string(FieldKind k) { return k == FieldKind::kSigned ? "signed" : "unsigned"; }

FieldKind field_kind_from_string(const std::string& s) {
  if (s == "signed" || s == "sdf") return FieldKind::kSigned;
  if (s == "unsigned" || s == "usdf") return FieldKind::kUnsigned;
  throw std::invalid_argument("unknown field kind '" + s + "' (expected signed|unsigned)");
}

DistanceField::DistanceField(const GridSpec& spec, FieldKind kind, std::vector<double> values,
                             StageTimings timings)
    : spec_(spec), kind_(kind), values_(std::move(values)), timings_(std::move(timings)) {
  if (values_.size() != spec_.size())
    throw std::invalid_argument("DistanceField: value count does not match grid");
}

FieldQuery DistanceField::query(const Vec3& p) const {
  FieldQuery q;
  int i0[3], i1[3];
  double t[3];
  bool axis_clamped[3];
  for (int ax = 0; ax < 3; ++ax) {
    const int n = spec_.dims[ax];
    double u = (p[ax] - spec_.origin[ax]) / spec_.resolution - 0.5;
    axis_clamped[ax] = false;
    if (n == 1) {
      i0[ax] = i1[ax] = 0;
      t[ax] = 0.0;
      continue;
    }
    if (u < 0.0) {
      u = 0.0;
      axis_clamped[ax] = true;
    } else if (u > n - 1) {
      u = n - 1;
      axis_clamped[ax] = true;
    }
    // Snap lattice-coincident coordinates so voxel centers reproduce stored
    // values exactly despite rounding in the metric-to-lattice conversion.
    const double r = std::round(u);
    if (std::abs(u - r) < 1e-9) u = r;
    int lo = static_cast<int>(std::floor(u));
    if (lo > n - 2) lo = n - 2;
    i0[ax] = lo;
    i1[ax] = lo + 1;
    t[ax] = u - lo;
  }
  q.clamped = axis_clamped[0] || axis_clamped[1] || axis_clamped[2];

  const auto at = [&](int a, int b, int c) { return values_[spec_.linear(a, b, c)]; };
  const double v000 = at(i0[0], i0[1], i0[2]), v100 = at(i1[0], i0[1], i0[2]);
  const double v010 = at(i0[0], i1[1], i0[2]), v110 = at(i1[0], i1[1], i0[2]);
  const double v001 = at(i0[0], i0[1], i1[2]), v101 = at(i1[0], i0[1], i1[2]);
  const double v011 = at(i0[0], i1[1], i1[2]), v111 = at(i1[0], i1[1], i1[2]);
  const double tx = t[0], ty = t[1], tz = t[2];
  const double sx = 1.0 - tx, sy = 1.0 - ty, sz = 1.0 - tz;

  const double c00 = v000 * sx + v100 * tx, c10 = v010 * sx + v110 * tx;
  const double c01 = v001 * sx + v101 * tx, c11 = v011 * sx + v111 * tx;
  const double c0 = c00 * sy + c10 * ty, c1 = c01 * sy + c11 * ty;
  q.distance = c0 * sz + c1 * tz;

  const double inv_res = 1.0 / spec_.resolution;
  double gx = (sy * sz * (v100 - v000) + ty * sz * (v110 - v010) + sy * tz * (v101 - v001) +
               ty * tz * (v111 - v011));
  double gy = (c10 - c00) * sz + (c11 - c01) * tz;
  double gz = c1 - c0;
  q.gradient = Vec3(spec_.dims[0] > 1 && !axis_clamped[0] ? gx * inv_res : 0.0,
                    spec_.dims[1] > 1 && !axis_clamped[1] ? gy * inv_res : 0.0,
                    spec_.dims[2] > 1 && !axis_clamped[2] ? gz * inv_res : 0.0);

  q.point = p;
  for (int ax = 0; ax < 3; ++ax)
    if (axis_clamped[ax]) q.point[ax] = spec_.origin[ax] + spec_.resolution * (i0[ax] + t[ax] + 0.5);
  return q;
}

namespace {

// Metric distance to the nearest site; the grid diagonal when there is none.
std::vector<double> unsigned_values(const BinaryMask& sites, const BuildOptions& opts) {
  const GridSpec& spec = sites.spec;
  std::vector<double> v(spec.size());
  edt::squared_edt(sites.bits, spec.dims, v, opts.backend);
  const double res = spec.resolution;
  const double sentinel = spec.diagonal();
  for (double& x : v) x = x == edt::kInf ? sentinel : res * std::sqrt(x);
  return v;
}

void truncate(std::vector<double>& v, const BuildOptions& opts) {
  if (!opts.truncation) return;
  const double r = *opts.truncation;
  if (!(r > 0.0)) throw std::invalid_argument("truncation radius must be positive");
  for (double& x : v) x = std::clamp(x, -r, r);
}

}  // namespace

DistanceField compute_usdf(const BinaryMask& mask, const BuildOptions& opts) {
  StageTimings timings;
  Stopwatch sw;
  auto v = unsigned_values(mask, opts);
  truncate(v, opts);
  timings.add("transform", sw.lap_ms());
  return DistanceField(mask.spec, FieldKind::kUnsigned, std::move(v), std::move(timings));
}

DistanceField compute_sdf(const BinaryMask& mask, const BuildOptions& opts) {
  StageTimings timings;
  Stopwatch sw;
  auto outside = unsigned_values(mask, opts);
  timings.add("transform", sw.lap_ms());
  const BinaryMask inverse = mask.inverted();
  auto inside = unsigned_values(inverse, opts);
  timings.add("inverse_transform", sw.lap_ms());
  for (std::size_t n = 0; n < outside.size(); ++n) outside[n] -= inside[n];
  truncate(outside, opts);
  timings.add("subtraction", sw.lap_ms());
  return DistanceField(mask.spec, FieldKind::kSigned, std::move(outside), std::move(timings));
}

DistanceField compute_field(const BinaryMask& mask, FieldKind kind, const BuildOptions& opts) {
  return kind == FieldKind::kSigned ? compute_sdf(mask, opts) : compute_usdf(mask, opts);
}

TimingStat summarize(const std::vector<double>& samples_ms) {
  TimingStat s;
  s.samples = samples_ms.size();
  if (samples_ms.empty()) return s;
  double sum = 0.0;
  for (double x : samples_ms) sum += x;
  s.mean_ms = sum / samples_ms.size();
  double ss = 0.0;
  for (double x : samples_ms) ss += (x - s.mean_ms) * (x - s.mean_ms);
  s.std_ms = samples_ms.size() > 1 ? std::sqrt(ss / (samples_ms.size() - 1)) : 0.0;
  return s;
}

BuildBenchResult benchmark_build(const std::vector<BinaryMask>& masks, bool run_unsigned,
                                 bool run_signed, const BuildOptions& opts) {
  if (masks.empty()) throw std::invalid_argument("benchmark_build: empty mask stream");
  BuildBenchResult r;
  r.spec = masks.front().spec;
  for (const auto& m : masks)
    if (!(m.spec == r.spec))
      throw std::invalid_argument("benchmark_build: masks must share one grid spec");

  const auto run = [&](FieldKind kind, TimingStat& stat, StageTimings& stages) {
    (void)compute_field(masks.front(), kind, opts);  // warm-up
    std::vector<double> samples;
    for (const auto& m : masks) {
      Stopwatch sw;
      const DistanceField f = compute_field(m, kind, opts);
      samples.push_back(sw.elapsed_ms());
      stages.merge(f.timings());
    }
    for (auto& s : stages.stages) s.second /= masks.size();
    stat = summarize(samples);
  };
  if (run_unsigned) run(FieldKind::kUnsigned, r.unsigned_ms, r.unsigned_stages);
  if (run_signed) run(FieldKind::kSigned, r.signed_ms, r.signed_stages);
  if (run_unsigned && run_signed && r.unsigned_ms.mean_ms > 0.0)
    r.ratio = r.signed_ms.mean_ms / r.unsigned_ms.mean_ms;
  return r;
}

void write_field_dump(std::ostream& os, const DistanceField& field) {
  const GridSpec& s = field.spec();
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << "DFPLAN-FIELD 1\n"
      << "kind " << to_string(field.kind()) << "\n"
      << "origin " << s.origin.x() << " " << s.origin.y() << " " << s.origin.z() << "\n"
      << "resolution " << s.resolution << "\n"
      << "dims " << s.dims[0] << " " << s.dims[1] << " " << s.dims[2] << "\n"
      << "data float64-le " << field.values().size() << "\n";
  os << hdr.str();
  static_assert(std::endian::native == std::endian::little, "dump format assumes little-endian host");
  os.write(reinterpret_cast<const char*>(field.values().data()),
           static_cast<std::streamsize>(field.values().size() * sizeof(double)));
}

DistanceField read_field_dump(std::istream& is) {
  const auto expect_line = [&](const std::string& key) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("field dump: truncated header");
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (k != key) throw std::runtime_error("field dump: expected '" + key + "', got '" + k + "'");
    std::string rest;
    std::getline(ls, rest);
    return std::istringstream(rest);
  };
  {
    auto ls = expect_line("DFPLAN-FIELD");
    int version = 0;
    ls >> version;
    if (version != 1) throw std::runtime_error("field dump: unsupported version");
  }
  std::string kind;
  expect_line("kind") >> kind;
  GridSpec spec;
  {
    auto ls = expect_line("origin");
    ls >> spec.origin.x() >> spec.origin.y() >> spec.origin.z();
  }
  expect_line("resolution") >> spec.resolution;
  {
    auto ls = expect_line("dims");
    ls >> spec.dims[0] >> spec.dims[1] >> spec.dims[2];
  }
  spec.validate();
  std::size_t count = 0;
  {
    auto ls = expect_line("data");
    std::string fmt;
    ls >> fmt >> count;
    if (fmt != "float64-le" || count != spec.size())
      throw std::runtime_error("field dump: bad data descriptor");
  }
  std::vector<double> values(count);
  is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw std::runtime_error("field dump: truncated data");
  return DistanceField(spec, field_kind_from_string(kind), std::move(values));
}

}  // namespace dfplan
