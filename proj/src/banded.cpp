#include "vex/banded.hpp"

#include <algorithm>

#include "vex/errors.hpp"

namespace vex {

BandedMatrix::BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
    : n_(n), lower_(lower), upper_(upper), bands_((lower + upper + 1) * n, 0.0) {}

BandedMatrix BandedMatrix::tridiagonal(std::size_t n, double sub, double diag, double super) {
  BandedMatrix m(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    m.set(i, i, diag);
    if (i > 0)
      m.set(i, i - 1, sub);
    if (i + 1 < n)
      m.set(i, i + 1, super);
  }
  return m;
}

double BandedMatrix::at(std::size_t row, std::size_t col) const {
  const long d = static_cast<long>(col) - static_cast<long>(row);
  if (d < -static_cast<long>(lower_) || d > static_cast<long>(upper_))
    return 0.0;
  return band(d)[row];
}

void BandedMatrix::set(std::size_t row, std::size_t col, double value) {
  const long d = static_cast<long>(col) - static_cast<long>(row);
  if (row >= n_ || col >= n_ || d < -static_cast<long>(lower_) || d > static_cast<long>(upper_))
    throw DimensionError("BandedMatrix::set outside the band");
  bands_[static_cast<std::size_t>(d + static_cast<long>(lower_)) * n_ + row] = value;
}

BandedMatrix BandedMatrix::transposed() const {
  BandedMatrix t(n_, upper_, lower_);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t lo = i >= lower_ ? i - lower_ : 0;
    const std::size_t hi = std::min(n_ - 1, i + upper_);
    for (std::size_t j = lo; j <= hi; ++j)
      t.set(j, i, at(i, j));
  }
  return t;
}

BandedMatrix operator+(const BandedMatrix &a, const BandedMatrix &b) {
  if (a.size() != b.size())
    throw DimensionError("BandedMatrix sum of different orders");
  BandedMatrix s(a.size(), std::max(a.lower(), b.lower()), std::max(a.upper(), b.upper()));
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= s.lower() ? i - s.lower() : 0;
    const std::size_t hi = std::min(n - 1, i + s.upper());
    for (std::size_t j = lo; j <= hi; ++j)
      s.set(i, j, a.at(i, j) + b.at(i, j));
  }
  return s;
}

BandedMatrix operator*(double s, const BandedMatrix &a) {
  BandedMatrix out = a;
  for (double &v : out.bands_)
    v *= s;
  return out;
}

} // namespace vex
