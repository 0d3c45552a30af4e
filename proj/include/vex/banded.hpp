#pragma once

#include <cstddef>
#include <vector>

namespace vex {

/// Square banded matrix stored by diagonals.
///
/// Diagonal `d` (offset from the main diagonal, -lower <= d <= upper) is held
/// in a length-n array indexed by row; entries falling outside the matrix are
/// kept at zero and never read.
class BandedMatrix {
public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper);

  /// tridiag(sub, diag, super) with constant bands.
  static BandedMatrix tridiagonal(std::size_t n, double sub, double diag, double super);

  std::size_t size() const { return n_; }
  std::size_t lower() const { return lower_; }
  std::size_t upper() const { return upper_; }

  double at(std::size_t row, std::size_t col) const;
  void set(std::size_t row, std::size_t col, double value);

  /// Pointer to diagonal `offset`, indexed by row.
  const double *band(long offset) const {
    return bands_.data() + static_cast<std::size_t>(offset + static_cast<long>(lower_)) * n_;
  }

  BandedMatrix transposed() const;

  /// Sum of two banded matrices of equal order.
  friend BandedMatrix operator+(const BandedMatrix &a, const BandedMatrix &b);
  friend BandedMatrix operator*(double s, const BandedMatrix &a);

private:
  std::size_t n_ = 0;
  std::size_t lower_ = 0;
  std::size_t upper_ = 0;
  std::vector<double> bands_;
};

} // namespace vex
