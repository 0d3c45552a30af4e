#include "vex/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "vex/errors.hpp"

namespace vex {

namespace {

constexpr double kExpCap = 700.0;
constexpr std::size_t kDenseJacobianLimit = 4096;

inline double capped_exp(double v) { return std::exp(std::min(v, kExpCap)); }

} // namespace

Vector NllsProblem::eval(std::span<const double> x) const {
  Vector fx(n_residuals());
  eval(x, fx);
  return fx;
}

Vector NllsProblem::jacobian_diag(std::span<const double>) const {
  throw ShapeError(name() + ": Jacobian is " + std::to_string(n_residuals()) + "x" +
                   std::to_string(n_unknowns()) + ", its diagonal preconditioner is undefined");
}

DenseMatrix NllsProblem::jacobian_dense(std::span<const double> x) const {
  check_x(x);
  if (n_unknowns() > kDenseJacobianLimit)
    throw DimensionError(name() + ": too large for a dense Jacobian");
  DenseMatrix j(n_residuals(), n_unknowns());
  Vector e(n_unknowns(), 0.0);
  for (std::size_t k = 0; k < n_unknowns(); ++k) {
    e[k] = 1.0;
    const Vector c = j_apply(x, e);
    std::copy(c.begin(), c.end(), j.col(k).begin());
    e[k] = 0.0;
  }
  return j;
}

std::optional<Vector> NllsProblem::structured_least_squares_step(std::span<const double>,
                                                                 std::span<const double>) const {
  return std::nullopt;
}

void NllsProblem::check_x(std::span<const double> x) const {
  if (x.size() != n_unknowns())
    throw DimensionError(name() + ": expected " + std::to_string(n_unknowns()) +
                         " unknowns, got " + std::to_string(x.size()));
}

void NllsProblem::check_r(std::span<const double> r) const {
  if (r.size() != n_residuals())
    throw DimensionError(name() + ": expected " + std::to_string(n_residuals()) +
                         " residual entries, got " + std::to_string(r.size()));
}

Vector residual(const NllsProblem &p, std::span<const double> x) {
  Vector r = p.eval(x);
  const Vector &y = p.data();
  kernels::lincomb(1.0, y, -1.0, r, r);
  return r;
}

double objective(const NllsProblem &p, std::span<const double> x) {
  const Vector r = residual(p, x);
  return kernels::dot(r, r);
}

// ---------------------------------------------------------------- Bratu

BratuProblem::BratuProblem(const BratuSpec &spec) : spec_(spec), linear_(spec.n) {
  if (spec.n < 3)
    throw ConfigError("bratu: need at least 3 grid points per direction");
  const std::size_t n = spec.n;
  const BandedMatrix l1 = BandedMatrix::tridiagonal(n, -1.0, 2.0, -1.0);
  BandedMatrix d1(n, 0, 1);
  for (std::size_t i = 0; i < n; ++i) {
    d1.set(i, i, -1.0);
    if (i + 1 < n)
      d1.set(i, i + 1, 1.0);
  }
  linear_.add(spec.alpha == 0.0 ? l1 : l1 + spec.alpha * d1, KronMode::AxI);
  linear_.add(l1, KronMode::IxA);
  linear_t_ = linear_.transposed();
  linear_diag_ = linear_.diagonal();
  linear_colsq_ = linear_.column_sq_norms();

  const Vector s = grid();
  Vector truth(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      truth[i * n + j] = std::exp(-10.0 * (s[i] * s[i] + s[j] * s[j]));
  y_ = eval(truth);
  x_true_ = std::move(truth);
}

Vector BratuProblem::grid() const {
  Vector s(spec_.n);
  for (std::size_t i = 0; i < spec_.n; ++i)
    s[i] = -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(spec_.n - 1);
  return s;
}

Vector BratuProblem::nonlinear_term(std::span<const double> x) const {
  Vector e(x.size());
  const double lambda = spec_.lambda;
  kernels::parallel_for(x.size(), [&](std::size_t i) { e[i] = lambda * capped_exp(x[i]); });
  return e;
}

void BratuProblem::eval(std::span<const double> x, std::span<double> fx) const {
  check_x(x);
  check_r(fx);
  linear_.apply(x, fx);
  const double lambda = spec_.lambda;
  kernels::parallel_for(x.size(), [&](std::size_t i) { fx[i] += lambda * capped_exp(x[i]); });
}

Vector BratuProblem::jacobian_diag(std::span<const double> x) const {
  check_x(x);
  Vector d = nonlinear_term(x);
  kernels::axpy(1.0, linear_diag_, d);
  return d;
}

Vector BratuProblem::jtj_diag(std::span<const double> x) const {
  check_x(x);
  const Vector e = nonlinear_term(x);
  Vector out(x.size());
  kernels::parallel_for(x.size(), [&](std::size_t i) {
    out[i] = linear_colsq_[i] + 2.0 * linear_diag_[i] * e[i] + e[i] * e[i];
  });
  return out;
}

Vector BratuProblem::jt_apply(std::span<const double> x, std::span<const double> r) const {
  check_x(x);
  check_r(r);
  Vector out(x.size());
  linear_t_.apply(r, out);
  const double lambda = spec_.lambda;
  kernels::parallel_for(x.size(), [&](std::size_t i) { out[i] += lambda * capped_exp(x[i]) * r[i]; });
  return out;
}

Vector BratuProblem::j_apply(std::span<const double> x, std::span<const double> v) const {
  check_x(x);
  check_x(v);
  Vector out(x.size());
  linear_.apply(v, out);
  const double lambda = spec_.lambda;
  kernels::parallel_for(x.size(), [&](std::size_t i) { out[i] += lambda * capped_exp(x[i]) * v[i]; });
  return out;
}

// ---------------------------------------------------------------- sparse sine

SparseSineProblem::SparseSineProblem(std::size_t n) : n_(n) {
  if (n < 2)
    throw ConfigError("sparse: need at least 2 unknowns");
  Vector truth(n);
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = -pi + 2.0 * pi * static_cast<double>(i + 1) / static_cast<double>(n + 1);
    truth[i] = 0.5 * std::sin(t);
  }
  y_ = eval(truth);
  x_true_ = std::move(truth);
}

void SparseSineProblem::eval(std::span<const double> x, std::span<double> fx) const {
  check_x(x);
  check_r(fx);
  kernels::parallel_for(n_ - 1, [&](std::size_t i) { fx[i] = std::sin(x[i] + x[i + 1]); });
}

Vector SparseSineProblem::jtj_diag(std::span<const double> x) const {
  check_x(x);
  Vector out(n_);
  kernels::parallel_for(n_, [&](std::size_t j) {
    double s = 0.0;
    if (j > 0) {
      const double c = std::cos(x[j - 1] + x[j]);
      s += c * c;
    }
    if (j + 1 < n_) {
      const double c = std::cos(x[j] + x[j + 1]);
      s += c * c;
    }
    out[j] = s;
  });
  return out;
}

Vector SparseSineProblem::jt_apply(std::span<const double> x, std::span<const double> r) const {
  check_x(x);
  check_r(r);
  Vector out(n_);
  kernels::parallel_for(n_, [&](std::size_t j) {
    double s = 0.0;
    if (j > 0)
      s += std::cos(x[j - 1] + x[j]) * r[j - 1];
    if (j + 1 < n_)
      s += std::cos(x[j] + x[j + 1]) * r[j];
    out[j] = s;
  });
  return out;
}

Vector SparseSineProblem::j_apply(std::span<const double> x, std::span<const double> v) const {
  check_x(x);
  check_x(v);
  Vector out(n_ - 1);
  kernels::parallel_for(n_ - 1, [&](std::size_t i) { out[i] = std::cos(x[i] + x[i + 1]) * (v[i] + v[i + 1]); });
  return out;
}

std::optional<Vector> SparseSineProblem::structured_least_squares_step(
    std::span<const double> x, std::span<const double> r) const {
  check_x(x);
  check_r(r);
  const std::size_t m = n_ - 1;
  Vector c(m);
  double frob = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    c[i] = std::cos(x[i] + x[i + 1]);
    frob += 2.0 * c[i] * c[i];
  }
  frob = std::sqrt(frob);
  for (std::size_t i = 0; i < m; ++i)
    if (!(std::abs(c[i]) > 1e-12 * frob))
      throw SingularError("sparse: linearized system is rank deficient at row " + std::to_string(i));
  // Same operation order as dense back substitution on [R1 | r_n].
  Vector delta(n_, 0.0);
  for (std::size_t ii = m; ii-- > 0;) {
    double s = r[ii];
    if (ii + 1 < m)
      s -= c[ii] * delta[ii + 1];
    delta[ii] = s / c[ii];
  }
  return delta;
}

SparseSineProblem build_sparse_sine(std::size_t n) { return SparseSineProblem(n); }

BratuProblem build_bratu(const BratuSpec &spec) { return BratuProblem(spec); }

// ---------------------------------------------------------------- dense linear

DenseLinearProblem::DenseLinearProblem(DenseMatrix a, Vector c, Vector y)
    : a_(std::move(a)), c_(std::move(c)) {
  if (c_.size() != a_.rows() || y.size() != a_.rows())
    throw DimensionError("linear: offset and data must have one entry per row");
  y_ = std::move(y);
}

DenseLinearProblem DenseLinearProblem::with_truth(DenseMatrix a, Vector c, Vector x_true) {
  if (x_true.size() != a.cols())
    throw DimensionError("linear: truth must have one entry per column");
  Vector y = c;
  for (std::size_t j = 0; j < a.cols(); ++j)
    kernels::axpy(x_true[j], a.col(j), y);
  DenseLinearProblem p(std::move(a), std::move(c), std::move(y));
  p.x_true_ = std::move(x_true);
  return p;
}

void DenseLinearProblem::eval(std::span<const double> x, std::span<double> fx) const {
  check_x(x);
  check_r(fx);
  std::copy(c_.begin(), c_.end(), fx.begin());
  for (std::size_t j = 0; j < a_.cols(); ++j)
    kernels::axpy(x[j], a_.col(j), fx);
}

Vector DenseLinearProblem::jacobian_diag(std::span<const double> x) const {
  check_x(x);
  if (!square())
    return NllsProblem::jacobian_diag(x);
  Vector d(a_.rows());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = a_(i, i);
  return d;
}

Vector DenseLinearProblem::jtj_diag(std::span<const double> x) const {
  check_x(x);
  Vector d(a_.cols());
  for (std::size_t j = 0; j < a_.cols(); ++j)
    d[j] = kernels::dot(a_.col(j), a_.col(j));
  return d;
}

Vector DenseLinearProblem::jt_apply(std::span<const double> x, std::span<const double> r) const {
  check_x(x);
  check_r(r);
  Vector out(a_.cols());
  for (std::size_t j = 0; j < a_.cols(); ++j)
    out[j] = kernels::dot(a_.col(j), r);
  return out;
}

Vector DenseLinearProblem::j_apply(std::span<const double> x, std::span<const double> v) const {
  check_x(x);
  check_x(v);
  Vector out(a_.rows(), 0.0);
  for (std::size_t j = 0; j < a_.cols(); ++j)
    kernels::axpy(v[j], a_.col(j), out);
  return out;
}

DenseMatrix DenseLinearProblem::jacobian_dense(std::span<const double> x) const {
  check_x(x);
  return a_;
}

// ---------------------------------------------------------------- checks

double finite_difference_jacobian_check(const NllsProblem &p, std::span<const double> x,
                                        double h, std::uint64_t seed) {
  if (x.size() != p.n_unknowns())
    throw DimensionError("finite_difference_jacobian_check: x has the wrong length");
  if (p.n_unknowns() > 2000)
    throw DimensionError("finite_difference_jacobian_check: limited to 2000 unknowns");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector r(p.n_residuals());
  for (double &v : r)
    v = dist(rng);

  const Vector analytic = p.jt_apply(x, r);
  Vector probe(x.begin(), x.end());
  double worst = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < probe.size(); ++j) {
    const double saved = probe[j];
    probe[j] = saved + h;
    const double up = kernels::dot(p.eval(probe), r);
    probe[j] = saved - h;
    const double down = kernels::dot(p.eval(probe), r);
    probe[j] = saved;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic[j]));
    scale = std::max(scale, std::abs(analytic[j]));
  }
  return scale > 0.0 ? worst / scale : worst;
}

} // namespace vex
