#include "vex/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "vex/errors.hpp"

namespace vex::kernels {

namespace {

void check_same(std::size_t a, std::size_t b, const char *what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": length mismatch");
}

void check_grid(const BandedMatrix &a, std::size_t x, std::size_t y) {
  const std::size_t n = a.size();
  if (x != n * n || y != n * n)
    throw DimensionError("Kronecker apply: vector length is not n^2");
}

// Row `i` of the grid: y_i (+)= sum_d A[i, i+d] x_{i+d}.
inline void kron_left_row(const BandedMatrix &a, const double *x, double *y, std::size_t i,
                          bool accumulate) {
  const std::size_t n = a.size();
  double *yi = y + i * n;
  if (!accumulate)
    for (std::size_t j = 0; j < n; ++j)
      yi[j] = 0.0;
  const long lo = -static_cast<long>(a.lower());
  const long hi = static_cast<long>(a.upper());
  for (long d = lo; d <= hi; ++d) {
    const long k = static_cast<long>(i) + d;
    if (k < 0 || k >= static_cast<long>(n))
      continue;
    const double c = a.band(d)[i];
    if (c == 0.0)
      continue;
    const double *xk = x + static_cast<std::size_t>(k) * n;
    for (std::size_t j = 0; j < n; ++j)
      yi[j] += c * xk[j];
  }
}

// Row `i` of the grid: y_ij (+)= sum_d A[j, j+d] x_{i, j+d}.
inline void kron_right_row(const BandedMatrix &a, const double *x, double *y, std::size_t i,
                           bool accumulate) {
  const std::size_t n = a.size();
  const double *xi = x + i * n;
  double *yi = y + i * n;
  const long lo = -static_cast<long>(a.lower());
  const long hi = static_cast<long>(a.upper());
  for (std::size_t j = 0; j < n; ++j) {
    double s = accumulate ? yi[j] : 0.0;
    for (long d = lo; d <= hi; ++d) {
      const long l = static_cast<long>(j) + d;
      if (l < 0 || l >= static_cast<long>(n))
        continue;
      s += a.band(d)[j] * xi[l];
    }
    yi[j] = s;
  }
}

} // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size(), "dot");
  return blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double norm2(std::span<const double> a) {
  return std::sqrt(blocked_sum(a.size(), [&](std::size_t i) { return a[i] * a[i]; }));
}

double distance(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size(), "distance");
  return std::sqrt(blocked_sum(a.size(), [&](std::size_t i) {
    const double d = a[i] - b[i];
    return d * d;
  }));
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size(), "axpy");
  parallel_for(x.size(), [&](std::size_t i) { y[i] += a * x[i]; });
}

void scale(double a, std::span<double> x) {
  parallel_for(x.size(), [&](std::size_t i) { x[i] *= a; });
}

void lincomb(double a, std::span<const double> x, double b, std::span<const double> y,
             std::span<double> out) {
  check_same(x.size(), y.size(), "lincomb");
  check_same(x.size(), out.size(), "lincomb");
  parallel_for(x.size(), [&](std::size_t i) { out[i] = a * x[i] + b * y[i]; });
}

void kron_left(const BandedMatrix &a, std::span<const double> x, std::span<double> y,
               bool accumulate) {
  check_grid(a, x.size(), y.size());
  const auto n = static_cast<long>(a.size());
#pragma omp parallel for schedule(static) if (x.size() >= kParallelMin)
  for (long i = 0; i < n; ++i)
    kron_left_row(a, x.data(), y.data(), static_cast<std::size_t>(i), accumulate);
}

void kron_right(const BandedMatrix &a, std::span<const double> x, std::span<double> y,
                bool accumulate) {
  check_grid(a, x.size(), y.size());
  const auto n = static_cast<long>(a.size());
#pragma omp parallel for schedule(static) if (x.size() >= kParallelMin)
  for (long i = 0; i < n; ++i)
    kron_right_row(a, x.data(), y.data(), static_cast<std::size_t>(i), accumulate);
}

namespace serial {

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double distance(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size(), "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] += a * x[i];
}

void scale(double a, std::span<double> x) {
  for (double &v : x)
    v *= a;
}

void lincomb(double a, std::span<const double> x, double b, std::span<const double> y,
             std::span<double> out) {
  check_same(x.size(), y.size(), "lincomb");
  check_same(x.size(), out.size(), "lincomb");
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = a * x[i] + b * y[i];
}

// One output entry at a time, walking the band of the active factor.
void kron_left(const BandedMatrix &a, std::span<const double> x, std::span<double> y,
               bool accumulate) {
  check_grid(a, x.size(), y.size());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = accumulate ? y[i * n + j] : 0.0;
      const std::size_t lo = i >= a.lower() ? i - a.lower() : 0;
      const std::size_t hi = std::min(n - 1, i + a.upper());
      for (std::size_t k = lo; k <= hi; ++k)
        s += a.at(i, k) * x[k * n + j];
      y[i * n + j] = s;
    }
}

void kron_right(const BandedMatrix &a, std::span<const double> x, std::span<double> y,
                bool accumulate) {
  check_grid(a, x.size(), y.size());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = accumulate ? y[i * n + j] : 0.0;
      const std::size_t lo = j >= a.lower() ? j - a.lower() : 0;
      const std::size_t hi = std::min(n - 1, j + a.upper());
      for (std::size_t l = lo; l <= hi; ++l)
        s += a.at(j, l) * x[i * n + l];
      y[i * n + j] = s;
    }
}

} // namespace serial
} // namespace vex::kernels
