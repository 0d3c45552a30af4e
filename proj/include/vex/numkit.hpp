#pragma once

// Dense and structured linear-algebra kernels used by the extrapolation
// methods and the problem operators.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "vex/banded.hpp"
#include "vex/kernels.hpp"

namespace vex {

/// Column-major dense matrix.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double &operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  /// Appends a column; the first column fixes the row count.
  void append_column(std::span<const double> c);
  /// Keeps only the leading `k` columns.
  void truncate_columns(std::size_t k);

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Upper-triangular matrix stored by packed columns; column j holds rows 0..j.
class UpperTriangular {
public:
  UpperTriangular() = default;
  explicit UpperTriangular(std::size_t order);
  /// From a dense square matrix; the strictly-lower part is ignored.
  static UpperTriangular from_dense(const DenseMatrix &m);

  std::size_t order() const { return order_; }

  double operator()(std::size_t i, std::size_t j) const {
    return i <= j ? data_[j * (j + 1) / 2 + i] : 0.0;
  }
  double &at(std::size_t i, std::size_t j) { return data_[j * (j + 1) / 2 + i]; }

  /// Rows 0..j of column j.
  std::span<const double> column(std::size_t j) const {
    return {data_.data() + j * (j + 1) / 2, j + 1};
  }

  /// Appends column `order()`; `c` must hold order()+1 entries.
  void append_column(std::span<const double> c);
  /// Leading k x k block.
  UpperTriangular leading(std::size_t k) const;

  Vector apply(std::span<const double> x) const;

private:
  std::size_t order_ = 0;
  std::vector<double> data_;
};

inline constexpr double kBreakdownTol = 1e-14;
inline constexpr double kSingularTol = 1e-14;

/// Outcome of orthogonalizing one vector against the current basis.
struct Projection {
  Vector coeffs;          ///< Components along the existing basis (both passes summed).
  Vector residual_vector; ///< What is left after orthogonalization.
  double residual = 0.0;  ///< Its norm.
  double input_norm = 0.0;
  bool dependent = false; ///< residual <= tol * input_norm
};

/// Thin QR grown one column at a time by modified Gram-Schmidt with one
/// reorthogonalization pass.
class IncrementalQr {
public:
  IncrementalQr() = default;
  IncrementalQr(DenseMatrix q, UpperTriangular r);

  std::size_t size() const { return r_.order(); }
  const DenseMatrix &q() const { return q_; }
  const UpperTriangular &r() const { return r_; }

  /// Orthogonalizes `v` without modifying the factorization.
  Projection project(std::span<const double> v, double breakdown_tol = kBreakdownTol) const;

  /// Appends `v`; throws BreakdownError when it depends on the basis.
  void append(std::span<const double> v, double breakdown_tol = kBreakdownTol);
  /// Appends a vector already orthogonalized by project(); BreakdownError if dependent.
  void commit(Projection p);
  /// Drops all but the leading k columns.
  void truncate(std::size_t k);

  /// Q_k * y for y of length k <= size() (leading k columns).
  Vector combine(std::span<const double> y) const;

private:
  // Two MGS passes; returns the residual vector and accumulates coeffs.
  Vector orthogonalize(std::span<const double> v, Vector &coeffs) const;

  DenseMatrix q_;
  UpperTriangular r_;
};

/// Returns the factorization of [old columns, v] given Q and R of the old columns.
std::pair<DenseMatrix, UpperTriangular> mgs_append(const DenseMatrix &q_basis,
                                                   const UpperTriangular &r,
                                                   std::span<const double> v);

/// Back substitution R x = b. SingularError when a pivot is below
/// kSingularTol times the largest pivot.
Vector solve_upper(const UpperTriangular &r, std::span<const double> b);
/// Forward substitution R^T x = b, same singularity rule.
Vector solve_upper_transposed(const UpperTriangular &r, std::span<const double> b);
/// R^T R d = b via two triangular solves.
Vector solve_normal_from_r(const UpperTriangular &r, std::span<const double> b);

/// Least-squares solution of min ||A x - b|| by unpivoted Householder QR.
///
/// For m < n the basic solution is returned (trailing n - m unknowns zero).
/// Reflectors whose subcolumn is already zero are skipped, so a matrix that
/// is already upper trapezoidal costs O(mn). Throws SingularError when a
/// pivot of R falls below rank_tol * ||A||_F.
Vector householder_least_squares(DenseMatrix a, std::span<const double> b,
                                 double rank_tol = 1e-12);

enum class KronMode {
  AxI, ///< A kron I: acts along the slow (first) grid index
  IxA  ///< I kron A: acts along the fast (second) grid index
};

struct KroneckerTerm {
  BandedMatrix factor;
  KronMode mode;
};

/// Sum of Kronecker terms acting on vectors of length n^2, applied matrix-free.
class KroneckerOperator {
public:
  KroneckerOperator() = default;
  explicit KroneckerOperator(std::size_t n) : n_(n) {}
  KroneckerOperator(std::size_t n, std::vector<KroneckerTerm> terms);

  std::size_t n() const { return n_; }
  std::size_t dim() const { return n_ * n_; }
  const std::vector<KroneckerTerm> &terms() const { return terms_; }

  KroneckerOperator &add(BandedMatrix factor, KronMode mode);

  void apply(std::span<const double> x, std::span<double> y) const;
  KroneckerOperator transposed() const;

  /// Main diagonal of the n^2 x n^2 operator.
  Vector diagonal() const;
  /// Squared Euclidean norm of every column.
  Vector column_sq_norms() const;

private:
  // All AxI terms folded into one factor, likewise IxA.
  std::pair<BandedMatrix, BandedMatrix> folded() const;

  std::size_t n_ = 0;
  std::vector<KroneckerTerm> terms_;
};

/// op * x; DimensionError unless x has length n^2.
Vector kron_apply(const KroneckerOperator &op, std::span<const double> x);

} // namespace vex
