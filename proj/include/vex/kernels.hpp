#pragma once

// Data-parallel vector kernels.
//
// Every kernel in vex::kernels is OpenMP-parallel. Reductions are computed
// over fixed-size blocks whose partial sums are combined serially, so results
// do not depend on the number of threads. vex::kernels::serial holds plain
// loop versions used as references in tests and benchmarks.

#include <cstddef>
#include <span>
#include <vector>

#include "vex/banded.hpp"

namespace vex {

using Vector = std::vector<double>;

namespace kernels {

/// Loops shorter than this stay on the calling thread.
inline constexpr std::size_t kParallelMin = 8192;
/// Reduction block length; fixed so summation order is reproducible.
inline constexpr std::size_t kReduceBlock = 4096;

template <class F> void parallel_for(std::size_t n, F &&body) {
  const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (long i = 0; i < count; ++i)
    body(static_cast<std::size_t>(i));
}

/// Deterministic blocked sum of term(i) for i in [0, n).
template <class F> double blocked_sum(std::size_t n, F &&term) {
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  if (blocks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += term(i);
    return s;
  }
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<long>(blocks);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (long b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = lo + kReduceBlock < n ? lo + kReduceBlock : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (double p : partial)
    s += p;
  return s;
}

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// ||a - b||_2 without a temporary.
double distance(std::span<const double> a, std::span<const double> b);

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);
/// out = a * x + b * y; out may alias x or y.
void lincomb(double a, std::span<const double> x, double b, std::span<const double> y,
             std::span<double> out);

/// y (+)= (A kron I) x on an n x n grid, x[i*n + j] with i the slow index.
void kron_left(const BandedMatrix &a, std::span<const double> x, std::span<double> y,
               bool accumulate);
/// y (+)= (I kron A) x.
void kron_right(const BandedMatrix &a, std::span<const double> x, std::span<double> y,
                bool accumulate);

namespace serial {

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);
void lincomb(double a, std::span<const double> x, double b, std::span<const double> y,
             std::span<double> out);
void kron_left(const BandedMatrix &a, std::span<const double> x, std::span<double> y,
               bool accumulate);
void kron_right(const BandedMatrix &a, std::span<const double> x, std::span<double> y,
                bool accumulate);

} // namespace serial
} // namespace kernels
} // namespace vex
