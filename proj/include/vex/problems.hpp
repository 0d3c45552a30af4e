#pragma once

// Nonlinear least-squares test problems min_x ||y - f(x)||^2.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "vex/numkit.hpp"

namespace vex {

/// A nonlinear least-squares instance: data y, the model f and the Jacobian
/// products the solvers need. Implementations are immutable after
/// construction and every evaluator is safe to call concurrently.
class NllsProblem {
public:
  virtual ~NllsProblem() = default;

  virtual std::size_t n_unknowns() const = 0;
  virtual std::size_t n_residuals() const = 0;
  virtual std::string name() const = 0;

  const Vector &data() const { return y_; }
  const std::optional<Vector> &x_true() const { return x_true_; }

  /// fx = f(x)
  virtual void eval(std::span<const double> x, std::span<double> fx) const = 0;
  Vector eval(std::span<const double> x) const;

  bool square() const { return n_unknowns() == n_residuals(); }

  /// diag(J(x)); ShapeError unless the Jacobian is square.
  virtual Vector jacobian_diag(std::span<const double> x) const;
  /// diag(J(x)^T J(x)), i.e. squared column norms of J(x).
  virtual Vector jtj_diag(std::span<const double> x) const = 0;
  /// J(x)^T r
  virtual Vector jt_apply(std::span<const double> x, std::span<const double> r) const = 0;
  /// J(x) v
  virtual Vector j_apply(std::span<const double> x, std::span<const double> v) const = 0;

  /// Dense J(x), assembled column by column from j_apply.
  virtual DenseMatrix jacobian_dense(std::span<const double> x) const;

  /// Least-squares step min ||r - J(x) δ|| from the Jacobian's sparsity, when
  /// the problem has one; otherwise nullopt and callers go dense.
  virtual std::optional<Vector> structured_least_squares_step(std::span<const double> x,
                                                              std::span<const double> r) const;

protected:
  void check_x(std::span<const double> x) const;
  void check_r(std::span<const double> r) const;

  Vector y_;
  std::optional<Vector> x_true_;
};

/// y - f(x)
Vector residual(const NllsProblem &p, std::span<const double> x);
/// g(x) = ||y - f(x)||^2
double objective(const NllsProblem &p, std::span<const double> x);

/// Parameters of -Δx + α ∂x/∂s + λ e^x = y on [-3,3]^2 with n points per direction.
struct BratuSpec {
  std::size_t n = 100;
  double alpha = 0.0;
  double lambda = 1.0;
};

/// Discrete Bratu model f(x) = (L1⊗I + I⊗L1) x + α (D1⊗I) x + λ e^x with
/// L1 = tridiag(-1, 2, -1) and D1 = upper-bidiagonal (-1, 1), both unscaled.
///
/// Grid values are stored x[i*n + j] with i along s and j along t. The
/// truth is e^{-10(s^2+t^2)} sampled on the uniform grid including the
/// boundary, and y = f(x_true).
class BratuProblem final : public NllsProblem {
public:
  explicit BratuProblem(const BratuSpec &spec);

  std::size_t n_unknowns() const override { return spec_.n * spec_.n; }
  std::size_t n_residuals() const override { return spec_.n * spec_.n; }
  std::string name() const override { return "bratu"; }
  const BratuSpec &spec() const { return spec_; }

  /// Linear part L + αD as a matrix-free operator.
  const KroneckerOperator &linear_operator() const { return linear_; }

  void eval(std::span<const double> x, std::span<double> fx) const override;
  using NllsProblem::eval;
  Vector jacobian_diag(std::span<const double> x) const override;
  Vector jtj_diag(std::span<const double> x) const override;
  Vector jt_apply(std::span<const double> x, std::span<const double> r) const override;
  Vector j_apply(std::span<const double> x, std::span<const double> v) const override;

  /// Grid abscissae shared by both directions.
  Vector grid() const;

private:
  // λ e^{min(x, 700)} elementwise.
  Vector nonlinear_term(std::span<const double> x) const;

  BratuSpec spec_;
  KroneckerOperator linear_;
  KroneckerOperator linear_t_;
  Vector linear_diag_;
  Vector linear_colsq_;
};

/// f_i(x) = sin(x_i + x_{i+1}), i = 0..n-2, with truth ½ sin(t) on n interior
/// points of (-π, π). The Jacobian is (n-1) x n upper bidiagonal.
class SparseSineProblem final : public NllsProblem {
public:
  explicit SparseSineProblem(std::size_t n);

  std::size_t n_unknowns() const override { return n_; }
  std::size_t n_residuals() const override { return n_ - 1; }
  std::string name() const override { return "sparse"; }

  void eval(std::span<const double> x, std::span<double> fx) const override;
  using NllsProblem::eval;
  Vector jtj_diag(std::span<const double> x) const override;
  Vector jt_apply(std::span<const double> x, std::span<const double> r) const override;
  Vector j_apply(std::span<const double> x, std::span<const double> v) const override;

  /// Basic solution with δ_{n-1} = 0 by bidiagonal back substitution; the
  /// Jacobian is already upper trapezoidal so this is the QR solution.
  std::optional<Vector> structured_least_squares_step(std::span<const double> x,
                                                      std::span<const double> r) const override;

private:
  std::size_t n_;
};

/// f(x) = A x + c with a dense A. Data come from x_true when given.
class DenseLinearProblem final : public NllsProblem {
public:
  DenseLinearProblem(DenseMatrix a, Vector c, Vector y);
  static DenseLinearProblem with_truth(DenseMatrix a, Vector c, Vector x_true);

  std::size_t n_unknowns() const override { return a_.cols(); }
  std::size_t n_residuals() const override { return a_.rows(); }
  std::string name() const override { return "linear"; }

  void eval(std::span<const double> x, std::span<double> fx) const override;
  using NllsProblem::eval;
  Vector jacobian_diag(std::span<const double> x) const override;
  Vector jtj_diag(std::span<const double> x) const override;
  Vector jt_apply(std::span<const double> x, std::span<const double> r) const override;
  Vector j_apply(std::span<const double> x, std::span<const double> v) const override;
  DenseMatrix jacobian_dense(std::span<const double> x) const override;

private:
  DenseMatrix a_;
  Vector c_;
};

/// ConfigError for n < 3.
BratuProblem build_bratu(const BratuSpec &spec);
/// ConfigError for n < 2.
SparseSineProblem build_sparse_sine(std::size_t n);

/// Largest discrepancy between J(x)^T r for a random r and central finite
/// differences of x -> <f(x), r>, relative to the largest component of J^T r.
/// DimensionError beyond 2000 unknowns.
double finite_difference_jacobian_check(const NllsProblem &p, std::span<const double> x,
                                        double h, std::uint64_t seed = 7);

} // namespace vex
