#include "dfplan/edt.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace dfplan::edt {

void transform_1d(const double* f, int n, double* d, int* v, double* z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    const double fq = f[q] + double(q) * q;
    double s = (fq - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * (q - v[k]));
    // z[0] is -inf, so k never drops below 0.
    while (s <= z[k]) {
      --k;
      s = (fq - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * (q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d, d + n, kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

namespace {

void check_sizes(std::span<const std::uint8_t> sites, const Index3& dims,
                 std::span<double> out) {
  const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  if (sites.size() != n || out.size() != n)
    throw std::invalid_argument("squared_edt: buffer size does not match dims");
}

struct Scratch {
  std::vector<double> f, d, z;
  std::vector<int> v;
  explicit Scratch(int n) : f(n), d(n), z(n + 1), v(n) {}
};

// Transforms one strided line of `data` in place.
inline void line_pass(double* data, std::size_t first, std::size_t stride, int n, Scratch& s) {
  for (int q = 0; q < n; ++q) s.f[q] = data[first + q * stride];
  transform_1d(s.f.data(), n, s.d.data(), s.v.data(), s.z.data());
  for (int q = 0; q < n; ++q) data[first + q * stride] = s.d[q];
}

}  // namespace

void squared_edt_serial(std::span<const std::uint8_t> sites, const Index3& dims,
                        std::span<double> out) {
  check_sizes(sites, dims, out);
  const int nx = dims[0], ny = dims[1], nz = dims[2];
  const std::size_t sx = 1, sy = nx, sz = static_cast<std::size_t>(nx) * ny;
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = sites[n] ? 0.0 : kInf;

  Scratch s(std::max({nx, ny, nz}));
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j) line_pass(out.data(), j * sy + k * sz, sx, nx, s);
  if (ny > 1)
    for (int k = 0; k < nz; ++k)
      for (int i = 0; i < nx; ++i) line_pass(out.data(), i * sx + k * sz, sy, ny, s);
  if (nz > 1)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) line_pass(out.data(), i * sx + j * sy, sz, nz, s);
}

void squared_edt_parallel(std::span<const std::uint8_t> sites, const Index3& dims,
                          std::span<double> out) {
  check_sizes(sites, dims, out);
  const int nx = dims[0], ny = dims[1], nz = dims[2];
  const std::size_t sx = 1, sy = nx, sz = static_cast<std::size_t>(nx) * ny;
  const auto total = static_cast<std::int64_t>(out.size());
  double* data = out.data();
  const std::uint8_t* in = sites.data();

#pragma omp parallel
  {
    Scratch s(std::max({nx, ny, nz}));

#pragma omp for schedule(static)
    for (std::int64_t n = 0; n < total; ++n) data[n] = in[n] ? 0.0 : kInf;

#pragma omp for collapse(2) schedule(static)
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j) line_pass(data, j * sy + k * sz, sx, nx, s);

    if (ny > 1) {
#pragma omp for collapse(2) schedule(static)
      for (int k = 0; k < nz; ++k)
        for (int i = 0; i < nx; ++i) line_pass(data, i * sx + k * sz, sy, ny, s);
    }

    if (nz > 1) {
#pragma omp for collapse(2) schedule(static)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) line_pass(data, i * sx + j * sy, sz, nz, s);
    }
  }
}

int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace dfplan::edt
