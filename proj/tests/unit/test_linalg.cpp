#include <cmath>
#include <limits>

#include <doctest.h>

#include "kernelrep/error.hpp"
#include "kernelrep/linalg.hpp"
#include "test_util.hpp"

using namespace kernelrep;

TEST_CASE("sym_eig of the identity") {
  const SymEig e = sym_eig(MatrixXd::Identity(3, 3));
  CHECK(e.values.isApprox(VectorXd::Ones(3)));
}

TEST_CASE("sym_eig of a diagonal matrix sorts descending") {
  MatrixXd M = MatrixXd::Zero(2, 2);
  M(0, 0) = 1;
  M(1, 1) = 4;
  const SymEig e = sym_eig(M);
  CHECK(e.values(0) == doctest::Approx(4.0));
  CHECK(e.values(1) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig of [[2,1],[1,2]]") {
  MatrixXd M(2, 2);
  M << 2, 1, 1, 2;
  const SymEig e = sym_eig(M);
  CHECK(e.values(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(e.values(1) == doctest::Approx(1.0).epsilon(1e-14));
  // first nonzero component positive
  CHECK(e.vectors(0, 0) > 0.0);
  CHECK(e.vectors(0, 1) > 0.0);
}

TEST_CASE("sym_eig round trip and orthonormality") {
  for (int m : {1, 5, 20, 50}) {
    const MatrixXd B = testutil::random_matrix(m, m, 100 + m);
    const MatrixXd M = B + B.transpose();
    const SymEig e = sym_eig(M);
    CHECK((e.vectors.transpose() * e.vectors - MatrixXd::Identity(m, m)).norm() <= 1e-10);
    const MatrixXd R = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((R - M).norm() / M.norm() <= 1e-8);
    for (int i = 1; i < m; ++i) CHECK(e.values(i - 1) >= e.values(i));
    for (int j = 0; j < m; ++j) {
      int first = 0;
      while (std::abs(e.vectors(first, j)) <= 1e-12) ++first;
      CHECK(e.vectors(first, j) > 0.0);
    }
  }
}

TEST_CASE("sym_eig rejects non-finite input") {
  MatrixXd M = MatrixXd::Identity(2, 2);
  M(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sym_eig(M), InputError);
  M(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(sym_eig(M), InputError);
}

TEST_CASE("inv_sqrt_psd examples") {
  MatrixXd D = MatrixXd::Zero(2, 2);
  D(0, 0) = 4;
  D(1, 1) = 1;
  MatrixXd expected = MatrixXd::Zero(2, 2);
  expected(0, 0) = 0.5;
  expected(1, 1) = 1.0;
  CHECK((inv_sqrt_psd(D, 0.0) - expected).norm() <= 1e-14);
  CHECK((inv_sqrt_psd(MatrixXd::Identity(4, 4), 0.0) - MatrixXd::Identity(4, 4)).norm() <= 1e-14);
}

TEST_CASE("inv_sqrt_psd whitens a random PSD matrix") {
  const MatrixXd M = testutil::random_psd(5, 3);
  const MatrixXd S = inv_sqrt_psd(M, 0.0);
  CHECK((S * M * S - MatrixXd::Identity(5, 5)).norm() <= 1e-6);
  CHECK((S * M - M * S).norm() <= 1e-6 * M.norm());
  const double eps = jitter_shift(M, 1e-3);
  CHECK(eps == doctest::Approx(1e-3 * M.trace() / 5));
  const MatrixXd Sj = inv_sqrt_psd(M, 1e-3);
  CHECK((Sj * (M + eps * MatrixXd::Identity(5, 5)) * Sj - MatrixXd::Identity(5, 5)).norm() <= 1e-6);
}

TEST_CASE("inv_sqrt_psd errors") {
  MatrixXd M = MatrixXd::Identity(2, 2);
  M(1, 1) = -1.0;
  CHECK_THROWS_AS(inv_sqrt_psd(M), NotPsdError);
  CHECK_THROWS_AS(inv_sqrt_psd(MatrixXd::Zero(3, 3), 0.0), SingularError);
}

TEST_CASE("psd_range keeps the numerical range only") {
  const MatrixXd B = testutil::random_matrix(6, 2, 4);
  const MatrixXd M = B * B.transpose();
  const PsdRange r = psd_range(M, 1e-10);
  REQUIRE(r.basis.cols() == 2);
  CHECK((r.basis.transpose() * r.basis - MatrixXd::Identity(2, 2)).norm() <= 1e-12);
  CHECK((r.basis * r.values.asDiagonal() * r.basis.transpose() - M).norm() <= 1e-10 * M.norm());
}

TEST_CASE("ridge_solve examples") {
  const VectorXd b = testutil::random_matrix(3, 1, 5).col(0);
  CHECK((ridge_solve(MatrixXd::Identity(3, 3), 1.0, b) - b / 2.0).norm() <= 1e-15);
  MatrixXd K = MatrixXd::Zero(2, 2);
  K(0, 0) = 1;
  K(1, 1) = 3;
  VectorXd rhs(2);
  rhs << 1, 3;
  CHECK((ridge_solve(K, 0.0, rhs) - VectorXd::Ones(2)).norm() <= 1e-15);
}

TEST_CASE("ridge_solve residual and linearity") {
  const MatrixXd K = testutil::random_psd(6, 6) + 0.1 * MatrixXd::Identity(6, 6);
  const MatrixXd B1 = testutil::random_matrix(6, 3, 7), B2 = testutil::random_matrix(6, 3, 8);
  const double lambda = 0.25;
  const MatrixXd X1 = ridge_solve(K, lambda, B1);
  CHECK((K * X1 + lambda * X1 - B1).norm() <= 1e-8 * B1.norm());
  const MatrixXd X12 = ridge_solve(K, lambda, B1 + B2);
  CHECK((X12 - X1 - ridge_solve(K, lambda, B2)).norm() <= 1e-10);
}

TEST_CASE("ridge_solve on a singular system asks for jitter") {
  MatrixXd K = MatrixXd::Ones(3, 3);
  CHECK_THROWS_AS(ridge_solve(K, 0.0, MatrixXd::Identity(3, 3)), SingularError);
  CHECK_THROWS_AS(ridge_solve(K, -1.0, MatrixXd::Identity(3, 3)), InputError);
}

TEST_CASE("ShiftedSolver reuses one factorisation") {
  const MatrixXd K = testutil::random_psd(5, 9);
  const ShiftedSolver s = ShiftedSolver::jittered(K, 1e-6);
  CHECK(s.size() == 5);
  CHECK(s.shift() == doctest::Approx(jitter_shift(K, 1e-6)));
  const VectorXd b = testutil::random_matrix(5, 1, 10).col(0);
  const VectorXd x = s.solve(b);
  CHECK(((K + s.shift() * MatrixXd::Identity(5, 5)) * x - b).norm() <= 1e-8 * b.norm() * K.norm());
}

TEST_CASE("symmetrized averages with the transpose") {
  const MatrixXd M = testutil::random_matrix(4, 4, 12);
  const MatrixXd S = symmetrized(M);
  CHECK(S == S.transpose());
  CHECK((S - 0.5 * (M + M.transpose())).norm() == 0.0);
}
