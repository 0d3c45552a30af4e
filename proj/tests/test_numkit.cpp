#include <doctest.h>

#include "oracles.hpp"
#include "vex/errors.hpp"
#include "vex/numkit.hpp"

using namespace vex;

namespace {

UpperTriangular upper(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t k = rows.size();
  UpperTriangular r(k);
  std::size_t i = 0;
  for (const auto &row : rows) {
    std::size_t j = 0;
    for (double v : row) {
      if (j >= i)
        r.at(i, j) = v;
      ++j;
    }
    ++i;
  }
  return r;
}

UpperTriangular random_upper(std::size_t k, std::mt19937_64 &gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), d(1.0, 2.0);
  UpperTriangular r(k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i <= j; ++i)
      r.at(i, j) = i == j ? d(gen) * (u(gen) < 0 ? -1.0 : 1.0) : u(gen);
  return r;
}

} // namespace

TEST_CASE("mgs_append normalizes the first column") {
  const Vector v{3.0, 4.0};
  auto [q, r] = mgs_append(DenseMatrix{}, UpperTriangular{}, v);
  REQUIRE(q.cols() == 1);
  CHECK(q(0, 0) == doctest::Approx(0.6));
  CHECK(q(1, 0) == doctest::Approx(0.8));
  CHECK(r(0, 0) == doctest::Approx(5.0));
}

TEST_CASE("mgs_append keeps an orthogonal input") {
  DenseMatrix q;
  q.append_column(Vector{1.0, 0.0, 0.0});
  UpperTriangular r(0);
  r.append_column(Vector{1.0});
  auto [q2, r2] = mgs_append(q, r, Vector{0.0, 2.0, 0.0});
  CHECK(q2(1, 1) == doctest::Approx(1.0));
  CHECK(q2(0, 1) == 0.0);
  CHECK(r2(0, 0) == 1.0);
  CHECK(r2(1, 1) == doctest::Approx(2.0));
  CHECK(r2(0, 1) == 0.0);
}

TEST_CASE("incremental QR reproduces the input and stays orthonormal") {
  std::mt19937_64 gen(42);
  for (auto [m, n] : {std::pair{8, 4}, std::pair{50, 20}, std::pair{200, 12}}) {
    const oracle::Mat u = oracle::random_mat(m, n, gen);
    IncrementalQr qr;
    for (int j = 0; j < n; ++j) {
      const oracle::Vec c = u.col(j);
      qr.append(oracle::to_vector(c));
    }
    const oracle::Mat q = oracle::to_eigen(qr.q());
    const oracle::Mat r = oracle::to_eigen(qr.r());
    const double orth =
        (q.transpose() * q - oracle::Mat::Identity(n, n)).cwiseAbs().maxCoeff();
    CHECK(orth < 1e-12);
    CHECK((q * r - u).norm() / u.norm() < 1e-12);

    // Same factorization as a reference QR up to column signs.
    const oracle::Mat ref_r = Eigen::HouseholderQR<oracle::Mat>(u).matrixQR().topRows(n)
                                  .triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
      CHECK(std::abs(r(j, j)) == doctest::Approx(std::abs(ref_r(j, j))).epsilon(1e-10));
  }
}

TEST_CASE("incremental QR flags dependent columns") {
  IncrementalQr qr;
  qr.append(Vector{1.0, 0.0, 0.0});
  qr.append(Vector{1.0, 1.0, 0.0});
  const auto p = qr.project(Vector{2.0, 3.0, 0.0});
  CHECK(p.dependent);
  CHECK(p.coeffs.size() == 2);
  CHECK_THROWS_AS(qr.append(Vector{2.0, 3.0, 0.0}), BreakdownError);
  CHECK(qr.size() == 2);
  qr.truncate(1);
  CHECK(qr.size() == 1);
  CHECK(qr.combine(Vector{2.0}) == Vector{2.0, 0.0, 0.0});
}

TEST_CASE("triangular solves") {
  CHECK(solve_upper(upper({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), Vector{1, 2, 3}) ==
        Vector{1, 2, 3});
  const Vector x = solve_upper(upper({{2, 1}, {0, 3}}), Vector{4, 3});
  CHECK(x[0] == doctest::Approx(1.5));
  CHECK(x[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(solve_upper(upper({{1, 1}, {0, 0}}), Vector{1, 1}), SingularError);
  CHECK_THROWS_AS(solve_upper_transposed(upper({{0, 1}, {0, 1}}), Vector{1, 1}), SingularError);
}

TEST_CASE("normal-equation solve from R") {
  const Vector d = solve_normal_from_r(upper({{2, 0}, {0, 3}}), Vector{1, 1});
  CHECK(d[0] == doctest::Approx(0.25));
  CHECK(d[1] == doctest::Approx(1.0 / 9.0));
  CHECK(solve_normal_from_r(upper({{1, 0}, {0, 1}}), Vector{1, 1}) == Vector{1, 1});

  std::mt19937_64 gen(5);
  for (std::size_t k : {1u, 5u, 12u, 20u}) {
    const UpperTriangular r = random_upper(k, gen);
    const oracle::Vec b = oracle::random_vec(static_cast<Eigen::Index>(k), gen);
    const oracle::Mat re = oracle::to_eigen(r);
    const oracle::Vec ref = (re.transpose() * re).ldlt().solve(b);
    const Vector got = solve_normal_from_r(r, oracle::to_vector(b));
    CHECK(oracle::rel_err(oracle::to_eigen(got), ref) < 1e-10);
  }
}

TEST_CASE("Householder least squares") {
  std::mt19937_64 gen(11);
  SUBCASE("overdetermined system matches a reference solve") {
    const oracle::Mat a = oracle::random_mat(30, 7, gen);
    const oracle::Vec b = oracle::random_vec(30, gen);
    DenseMatrix ad(30, 7);
    for (int j = 0; j < 7; ++j)
      for (int i = 0; i < 30; ++i)
        ad(i, j) = a(i, j);
    const Vector x = householder_least_squares(ad, oracle::to_vector(b));
    const oracle::Vec ref = a.colPivHouseholderQr().solve(b);
    CHECK(oracle::rel_err(oracle::to_eigen(x), ref) < 1e-11);
  }
  SUBCASE("wide upper-bidiagonal system gives the basic solution") {
    // J = [[1,1,0],[0,1,1]]: basic solution has x_2 = 0.
    DenseMatrix a(2, 3);
    a(0, 0) = a(0, 1) = a(1, 1) = a(1, 2) = 1.0;
    const Vector x = householder_least_squares(a, Vector{3.0, 5.0});
    CHECK(x[2] == 0.0);
    CHECK(x[1] == doctest::Approx(5.0));
    CHECK(x[0] == doctest::Approx(-2.0));
  }
  SUBCASE("rank-deficient columns are rejected") {
    DenseMatrix a(3, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    CHECK_THROWS_AS(householder_least_squares(a, Vector{1, 1, 1}), SingularError);
  }
}

TEST_CASE("Kronecker operator") {
  const std::size_t n = 3;
  KroneckerOperator op(n);
  op.add(BandedMatrix::tridiagonal(n, -1, 2, -1), KronMode::AxI);
  op.add(BandedMatrix::tridiagonal(n, -1, 2, -1), KronMode::IxA);

  CHECK(kron_apply(op, Vector(9, 0.0)) == Vector(9, 0.0));
  const Vector y = kron_apply(op, Vector(9, 1.0));
  const Vector grid{2, 1, 2, 1, 0, 1, 2, 1, 2};
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(y[i] == doctest::Approx(grid[i]));
  CHECK_THROWS_AS(kron_apply(op, Vector(8, 1.0)), DimensionError);

  SUBCASE("random operator against dense assembly") {
    std::mt19937_64 gen(3);
    const std::size_t m = 4;
    KroneckerOperator op2(m);
    op2.add(BandedMatrix::tridiagonal(m, 0.3, -1.2, 0.7), KronMode::AxI);
    op2.add(BandedMatrix::tridiagonal(m, -1, 2, -1), KronMode::IxA);
    op2.add(BandedMatrix::tridiagonal(m, 0.0, -1.0, 1.0), KronMode::AxI);
    const oracle::Mat id = oracle::Mat::Identity(m, m);
    const oracle::Mat dense = oracle::kron(oracle::tridiag(m, 0.3, -1.2, 0.7), id) +
                              oracle::kron(id, oracle::tridiag(m, -1, 2, -1)) +
                              oracle::kron(oracle::tridiag(m, 0, -1, 1), id);
    const oracle::Vec x = oracle::random_vec(16, gen);
    CHECK(oracle::max_abs_diff(kron_apply(op2, oracle::to_vector(x)), dense * x) < 1e-13);
    CHECK(oracle::max_abs_diff(kron_apply(op2.transposed(), oracle::to_vector(x)),
                               dense.transpose() * x) < 1e-13);
    CHECK(oracle::max_abs_diff(op2.diagonal(), dense.diagonal()) < 1e-14);
    CHECK(oracle::max_abs_diff(op2.column_sq_norms(), dense.colwise().squaredNorm().transpose()) <
          1e-13);

    // Linearity.
    const oracle::Vec z = oracle::random_vec(16, gen);
    const Vector lhs = kron_apply(op2, oracle::to_vector(2.0 * x - 3.0 * z));
    const oracle::Vec rhs = 2.0 * oracle::to_eigen(kron_apply(op2, oracle::to_vector(x))) -
                            3.0 * oracle::to_eigen(kron_apply(op2, oracle::to_vector(z)));
    CHECK(oracle::max_abs_diff(lhs, rhs) < 1e-13);
  }
}
