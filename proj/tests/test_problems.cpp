#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "vex/errors.hpp"
#include "vex/problems.hpp"

using namespace vex;

TEST_CASE("Bratu operator on a 3x3 grid") {
  const auto p = build_bratu({3, 0.0, 0.0});
  const Vector f = p.eval(Vector(9, 1.0));
  const Vector expect{2, 1, 2, 1, 0, 1, 2, 1, 2};
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(f[i] == doctest::Approx(expect[i]));
  CHECK_THROWS_AS(build_bratu({2, 0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(p.eval(Vector(8, 1.0)), DimensionError);
}

TEST_CASE("Bratu data and truth") {
  const auto p = build_bratu({20, 1.0, 10.0});
  REQUIRE(p.x_true());
  CHECK(objective(p, *p.x_true()) <= 1e-24);
  const Vector s = p.grid();
  CHECK(s.front() == -3.0);
  CHECK(s.back() == doctest::Approx(3.0));
  const auto &xt = *p.x_true();
  const std::size_t n = 20;
  for (std::size_t i : {0u, 7u, 19u})
    for (std::size_t j : {0u, 11u})
      CHECK(xt[i * n + j] == doctest::Approx(std::exp(-10.0 * (s[i] * s[i] + s[j] * s[j]))));
}

TEST_CASE("Bratu Jacobian products match dense assembly") {
  std::mt19937_64 gen(13);
  for (std::size_t n : {3u, 5u, 8u}) {
    for (auto [alpha, lambda] : {std::pair{0.0, 1.0}, std::pair{1.0, 10.0}, std::pair{3.0, 1e4}}) {
      const auto p = build_bratu({n, alpha, lambda});
      const auto N = static_cast<Eigen::Index>(n * n);
      const oracle::Vec x = oracle::random_vec(N, gen);
      const oracle::Vec r = oracle::random_vec(N, gen);
      const oracle::Mat lin = oracle::bratu_linear(static_cast<Eigen::Index>(n), alpha);
      const oracle::Mat j = oracle::bratu_jacobian(static_cast<Eigen::Index>(n), alpha, lambda, x);
      const Vector xv = oracle::to_vector(x), rv = oracle::to_vector(r);

      const oracle::Vec f = lin * x + lambda * x.array().exp().matrix();
      const double scale = 1.0 + lambda * std::exp(1.0);
      CHECK(oracle::max_abs_diff(p.eval(xv), f) <= 1e-12 * scale);
      CHECK(oracle::max_abs_diff(p.jt_apply(xv, rv), j.transpose() * r) <= 1e-12 * scale);
      CHECK(oracle::max_abs_diff(p.j_apply(xv, rv), j * r) <= 1e-12 * scale);
      CHECK(oracle::max_abs_diff(p.jacobian_diag(xv), j.diagonal()) <= 1e-12 * scale);
      CHECK(oracle::max_abs_diff(p.jtj_diag(xv), (j.transpose() * j).diagonal()) <=
            1e-12 * scale * scale);
      CHECK((oracle::to_eigen(p.jacobian_dense(xv)) - j).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
  }
}

TEST_CASE("Bratu Jacobian diagonal at zero") {
  const auto p = build_bratu({4, 0.0, 7.0});
  for (double d : p.jacobian_diag(Vector(16, 0.0)))
    CHECK(d == doctest::Approx(11.0));
  const auto q = build_bratu({4, 2.0, 7.0});
  for (double d : q.jacobian_diag(Vector(16, 0.0)))
    CHECK(d == doctest::Approx(9.0));
}

TEST_CASE("Bratu exponential is clamped") {
  const auto p = build_bratu({3, 0.0, 1.0});
  const Vector f = p.eval(Vector(9, 800.0));
  for (double v : f)
    CHECK(std::isfinite(v));
}

TEST_CASE("sparse sine problem") {
  const auto p = build_sparse_sine(6);
  CHECK(p.n_residuals() == 5);
  CHECK(p.eval(Vector(6, 0.0)) == Vector(5, 0.0));
  const Vector d = p.jtj_diag(Vector(6, 0.0));
  CHECK(d == Vector{1, 2, 2, 2, 2, 1});
  CHECK_THROWS_AS(p.jacobian_diag(Vector(6, 0.0)), ShapeError);
  CHECK_THROWS_AS(build_sparse_sine(1), ConfigError);

  const auto j0 = p.jacobian_dense(Vector(6, 0.0));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < 6; ++k)
      CHECK(j0(i, k) == ((k == i || k == i + 1) ? 1.0 : 0.0));

  const auto &xt = *p.x_true();
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(xt[i] == doctest::Approx(0.5 * std::sin(-std::numbers::pi +
                                                   2.0 * std::numbers::pi * (i + 1) / 7.0)));
  CHECK(objective(p, xt) <= 1e-28);
}

TEST_CASE("sparse sine Jacobian products match dense assembly") {
  std::mt19937_64 gen(19);
  const std::size_t n = 9;
  const auto p = build_sparse_sine(n);
  const oracle::Vec x = oracle::random_vec(n, gen);
  oracle::Mat j = oracle::Mat::Zero(n - 1, n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    j(i, i) = j(i, i + 1) = std::cos(x(i) + x(i + 1));
  const oracle::Vec r = oracle::random_vec(n - 1, gen), v = oracle::random_vec(n, gen);
  const Vector xv = oracle::to_vector(x);
  CHECK(oracle::max_abs_diff(p.jt_apply(xv, oracle::to_vector(r)), j.transpose() * r) < 1e-14);
  CHECK(oracle::max_abs_diff(p.j_apply(xv, oracle::to_vector(v)), j * v) < 1e-14);
  CHECK(oracle::max_abs_diff(p.jtj_diag(xv), (j.transpose() * j).diagonal()) < 1e-14);
}

TEST_CASE("structured least-squares step equals the dense basic solution") {
  std::mt19937_64 gen(21);
  const std::size_t n = 40;
  const auto p = build_sparse_sine(n);
  const Vector x = oracle::to_vector(oracle::random_vec(n, gen, -0.5, 0.5));
  const Vector r = residual(p, x);
  const auto structured = p.structured_least_squares_step(x, r);
  REQUIRE(structured);
  const Vector dense = householder_least_squares(p.jacobian_dense(x), r);
  CHECK(oracle::max_abs_diff(*structured, oracle::to_eigen(dense)) < 1e-10);
  CHECK((*structured)[n - 1] == 0.0);
  // It solves J δ = r exactly.
  CHECK(oracle::max_abs_diff(p.j_apply(x, *structured), oracle::to_eigen(r)) < 1e-10);
}

TEST_CASE("finite-difference check of J^T r") {
  std::mt19937_64 gen(27);
  const auto s = build_sparse_sine(50);
  CHECK(finite_difference_jacobian_check(s, oracle::to_vector(oracle::random_vec(50, gen)), 1e-6) <
        1e-6);
  const auto b = build_bratu({8, 1.0, 10.0});
  CHECK(finite_difference_jacobian_check(b, oracle::to_vector(oracle::random_vec(64, gen)), 1e-6) <
        1e-6);

  DenseMatrix a(5, 4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t i = 0; i < 5; ++i)
      a(i, j) = u(gen);
  const DenseLinearProblem lin(a, Vector(5, 0.0), Vector(5, 0.0));
  CHECK(finite_difference_jacobian_check(lin, Vector{0.1, 0.2, 0.3, 0.4}, 1e-3) < 1e-10);

  CHECK_THROWS_AS(finite_difference_jacobian_check(build_sparse_sine(3000), Vector(3000, 0.0), 1e-6),
                  DimensionError);
}

TEST_CASE("dense linear problem") {
  DenseMatrix a(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 3.0;
  a(0, 1) = 1.0;
  const auto p = DenseLinearProblem::with_truth(a, Vector{1.0, 0.0}, Vector{1.0, 2.0});
  CHECK(p.data() == Vector{5.0, 6.0});
  CHECK(objective(p, *p.x_true()) == 0.0);
  CHECK(p.jacobian_diag(Vector{0, 0}) == Vector{2.0, 3.0});
  CHECK(p.jtj_diag(Vector{0, 0}) == Vector{4.0, 10.0});
}
