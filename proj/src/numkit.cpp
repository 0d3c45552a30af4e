#include "vex/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vex/errors.hpp"

namespace vex {

void DenseMatrix::append_column(std::span<const double> c) {
  if (cols_ == 0 && rows_ == 0)
    rows_ = c.size();
  if (c.size() != rows_)
    throw DimensionError("DenseMatrix::append_column: expected " + std::to_string(rows_) +
                         " rows, got " + std::to_string(c.size()));
  data_.insert(data_.end(), c.begin(), c.end());
  ++cols_;
}

void DenseMatrix::truncate_columns(std::size_t k) {
  if (k >= cols_)
    return;
  cols_ = k;
  data_.resize(rows_ * k);
}

UpperTriangular::UpperTriangular(std::size_t order)
    : order_(order), data_(order * (order + 1) / 2, 0.0) {}

UpperTriangular UpperTriangular::from_dense(const DenseMatrix &m) {
  if (m.rows() != m.cols())
    throw DimensionError("UpperTriangular::from_dense: matrix is not square");
  UpperTriangular r(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i <= j; ++i)
      r.at(i, j) = m(i, j);
  return r;
}

void UpperTriangular::append_column(std::span<const double> c) {
  if (c.size() != order_ + 1)
    throw DimensionError("UpperTriangular::append_column: wrong column length");
  data_.insert(data_.end(), c.begin(), c.end());
  ++order_;
}

UpperTriangular UpperTriangular::leading(std::size_t k) const {
  if (k > order_)
    throw DimensionError("UpperTriangular::leading: block larger than matrix");
  UpperTriangular r;
  r.order_ = k;
  r.data_.assign(data_.begin(), data_.begin() + static_cast<long>(k * (k + 1) / 2));
  return r;
}

Vector UpperTriangular::apply(std::span<const double> x) const {
  if (x.size() != order_)
    throw DimensionError("UpperTriangular::apply: length mismatch");
  Vector y(order_, 0.0);
  for (std::size_t j = 0; j < order_; ++j) {
    const auto c = column(j);
    for (std::size_t i = 0; i <= j; ++i)
      y[i] += c[i] * x[j];
  }
  return y;
}

IncrementalQr::IncrementalQr(DenseMatrix q, UpperTriangular r) : q_(std::move(q)), r_(std::move(r)) {
  if (q_.cols() != r_.order())
    throw DimensionError("IncrementalQr: Q and R disagree on the column count");
}

Vector IncrementalQr::orthogonalize(std::span<const double> v, Vector &coeffs) const {
  Vector w(v.begin(), v.end());
  coeffs.assign(size(), 0.0);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < size(); ++i) {
      const double c = kernels::dot(q_.col(i), w);
      kernels::axpy(-c, q_.col(i), w);
      coeffs[i] += c;
    }
  }
  return w;
}

Projection IncrementalQr::project(std::span<const double> v, double breakdown_tol) const {
  if (size() > 0 && v.size() != q_.rows())
    throw DimensionError("IncrementalQr: vector length does not match the basis");
  Projection p;
  p.residual_vector = orthogonalize(v, p.coeffs);
  p.input_norm = kernels::norm2(v);
  p.residual = kernels::norm2(p.residual_vector);
  p.dependent = !(p.residual > breakdown_tol * p.input_norm);
  return p;
}

void IncrementalQr::append(std::span<const double> v, double breakdown_tol) {
  commit(project(v, breakdown_tol));
}

void IncrementalQr::commit(Projection p) {
  if (p.dependent)
    throw BreakdownError("IncrementalQr: column " + std::to_string(size()) +
                         " is numerically dependent on the basis");
  if (p.coeffs.size() != size())
    throw DimensionError("IncrementalQr::commit: projection is stale");
  kernels::scale(1.0 / p.residual, p.residual_vector);
  p.coeffs.push_back(p.residual);
  q_.append_column(p.residual_vector);
  r_.append_column(p.coeffs);
}

void IncrementalQr::truncate(std::size_t k) {
  if (k >= size())
    return;
  q_.truncate_columns(k);
  r_ = r_.leading(k);
}

Vector IncrementalQr::combine(std::span<const double> y) const {
  if (y.size() > size())
    throw DimensionError("IncrementalQr::combine: more coefficients than columns");
  Vector out(q_.rows(), 0.0);
  for (std::size_t j = 0; j < y.size(); ++j)
    kernels::axpy(y[j], q_.col(j), out);
  return out;
}

std::pair<DenseMatrix, UpperTriangular> mgs_append(const DenseMatrix &q_basis,
                                                   const UpperTriangular &r,
                                                   std::span<const double> v) {
  IncrementalQr qr(q_basis, r);
  qr.append(v);
  return {qr.q(), qr.r()};
}

namespace {

void check_pivots(const UpperTriangular &r) {
  double biggest = 0.0;
  for (std::size_t i = 0; i < r.order(); ++i)
    biggest = std::max(biggest, std::abs(r(i, i)));
  for (std::size_t i = 0; i < r.order(); ++i)
    if (!(std::abs(r(i, i)) >= kSingularTol * biggest) || r(i, i) == 0.0)
      throw SingularError("triangular solve: pivot " + std::to_string(i) + " is negligible");
}

} // namespace

Vector solve_upper(const UpperTriangular &r, std::span<const double> b) {
  if (b.size() != r.order())
    throw DimensionError("solve_upper: length mismatch");
  check_pivots(r);
  const std::size_t n = r.order();
  Vector x(b.begin(), b.end());
  for (std::size_t jj = n; jj-- > 0;) {
    x[jj] /= r(jj, jj);
    const auto c = r.column(jj);
    for (std::size_t i = 0; i < jj; ++i)
      x[i] -= c[i] * x[jj];
  }
  return x;
}

Vector solve_upper_transposed(const UpperTriangular &r, std::span<const double> b) {
  if (b.size() != r.order())
    throw DimensionError("solve_upper_transposed: length mismatch");
  check_pivots(r);
  const std::size_t n = r.order();
  Vector x(b.begin(), b.end());
  // Row j of R^T is column j of R.
  for (std::size_t j = 0; j < n; ++j) {
    const auto c = r.column(j);
    double s = x[j];
    for (std::size_t i = 0; i < j; ++i)
      s -= c[i] * x[i];
    x[j] = s / c[j];
  }
  return x;
}

Vector solve_normal_from_r(const UpperTriangular &r, std::span<const double> b) {
  return solve_upper(r, solve_upper_transposed(r, b));
}

Vector householder_least_squares(DenseMatrix a, std::span<const double> b, double rank_tol) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m)
    throw DimensionError("householder_least_squares: right-hand side length mismatch");
  double frob = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (double v : a.col(j))
      frob += v * v;
  frob = std::sqrt(frob);

  Vector rhs(b.begin(), b.end());
  const std::size_t p = std::min(m, n);
  Vector v(m);
  for (std::size_t k = 0; k < p; ++k) {
    auto ck = a.col(k);
    double tail = 0.0;
    for (std::size_t i = k + 1; i < m; ++i)
      tail += ck[i] * ck[i];
    if (tail == 0.0)
      continue; // H = I
    const double alpha = ck[k];
    const double beta = -std::copysign(std::sqrt(alpha * alpha + tail), alpha);
    const double tau = (beta - alpha) / beta;
    const double inv = 1.0 / (alpha - beta);
    v[k] = 1.0;
    for (std::size_t i = k + 1; i < m; ++i)
      v[i] = ck[i] * inv;
    ck[k] = beta;
    for (std::size_t i = k + 1; i < m; ++i)
      ck[i] = 0.0;
    auto reflect = [&](std::span<double> c) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i)
        s += v[i] * c[i];
      s *= tau;
      for (std::size_t i = k; i < m; ++i)
        c[i] -= s * v[i];
    };
    for (std::size_t j = k + 1; j < n; ++j)
      reflect(a.col(j));
    reflect(rhs);
  }

  for (std::size_t k = 0; k < p; ++k)
    if (!(std::abs(a(k, k)) > rank_tol * frob))
      throw SingularError("householder_least_squares: rank deficient at column " +
                          std::to_string(k));

  Vector x(n, 0.0);
  for (std::size_t kk = p; kk-- > 0;) {
    double s = rhs[kk];
    for (std::size_t j = kk + 1; j < p; ++j)
      s -= a(kk, j) * x[j];
    x[kk] = s / a(kk, kk);
  }
  return x;
}

KroneckerOperator::KroneckerOperator(std::size_t n, std::vector<KroneckerTerm> terms) : n_(n) {
  for (auto &t : terms)
    add(std::move(t.factor), t.mode);
}

KroneckerOperator &KroneckerOperator::add(BandedMatrix factor, KronMode mode) {
  if (factor.size() != n_)
    throw DimensionError("KroneckerOperator: factor order differs from grid size");
  terms_.push_back({std::move(factor), mode});
  return *this;
}

void KroneckerOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != dim() || y.size() != dim())
    throw DimensionError("KroneckerOperator::apply: expected vectors of length " +
                         std::to_string(dim()));
  if (terms_.empty()) {
    std::fill(y.begin(), y.end(), 0.0);
    return;
  }
  bool accumulate = false;
  for (const auto &t : terms_) {
    if (t.mode == KronMode::AxI)
      kernels::kron_left(t.factor, x, y, accumulate);
    else
      kernels::kron_right(t.factor, x, y, accumulate);
    accumulate = true;
  }
}

KroneckerOperator KroneckerOperator::transposed() const {
  KroneckerOperator t(n_);
  for (const auto &term : terms_)
    t.add(term.factor.transposed(), term.mode);
  return t;
}

std::pair<BandedMatrix, BandedMatrix> KroneckerOperator::folded() const {
  BandedMatrix left(n_, 0, 0);
  BandedMatrix right(n_, 0, 0);
  for (const auto &t : terms_) {
    if (t.mode == KronMode::AxI)
      left = left + t.factor;
    else
      right = right + t.factor;
  }
  return {left, right};
}

Vector KroneckerOperator::diagonal() const {
  const auto [left, right] = folded();
  Vector d(dim());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      d[i * n_ + j] = left.at(i, i) + right.at(j, j);
  return d;
}

Vector KroneckerOperator::column_sq_norms() const {
  // Column (k,l) of B kron I + I kron C has B[i,k] in rows (i,l), C[j,l] in
  // rows (k,j), and the two overlap only on the diagonal (k,l).
  const auto [left, right] = folded();
  Vector left_off(n_, 0.0), right_off(n_, 0.0);
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t i = 0; i < n_; ++i) {
      if (i == k)
        continue;
      left_off[k] += left.at(i, k) * left.at(i, k);
      right_off[k] += right.at(i, k) * right.at(i, k);
    }
  }
  Vector out(dim());
  for (std::size_t k = 0; k < n_; ++k)
    for (std::size_t l = 0; l < n_; ++l) {
      const double d = left.at(k, k) + right.at(l, l);
      out[k * n_ + l] = left_off[k] + right_off[l] + d * d;
    }
  return out;
}

Vector kron_apply(const KroneckerOperator &op, std::span<const double> x) {
  if (x.size() != op.dim())
    throw DimensionError("kron_apply: expected length " + std::to_string(op.dim()) + ", got " +
                         std::to_string(x.size()));
  Vector y(op.dim());
  op.apply(x, y);
  return y;
}

} // namespace vex
