#include <cmath>

#include <doctest.h>

#include "kernelrep/datasets.hpp"
#include "kernelrep/error.hpp"
#include "kernelrep/simple_contrastive.hpp"
#include "test_util.hpp"

using namespace kernelrep;

namespace {

TripletSet random_triplets(Index d, Index n, std::uint64_t seed, double aug_sd = 0.3) {
  return make_triplets(testutil::random_matrix(d, n, seed), aug_sd, seed + 1);
}

/// Loss sum_i f(x_i)^T (f(x_i^-) - f(x_i^+)) for an explicit linear map W (d x h).
double explicit_loss(const TripletSet& t, const MatrixXd& W) {
  const MatrixXd F = W.transpose() * t.anchors;
  const MatrixXd D = W.transpose() * (t.negatives - t.positives);
  return (F.array() * D.array()).sum();
}

/// Minimum of the explicit loss over W^T W = I: sum of the h smallest
/// eigenvalues of (Phi Delta^T + Delta Phi^T) / 2.
double explicit_optimum(const TripletSet& t, int h) {
  const MatrixXd Delta = t.negatives - t.positives;
  const MatrixXd S = 0.5 * (t.anchors * Delta.transpose() + Delta * t.anchors.transpose());
  const VectorXd ev = sym_eig(S).values;
  return ev.tail(h).sum();
}

MatrixXd explicit_W(const SimpleContrastiveModel& m) {
  const TripletSet& t = m.triplets;
  MatrixXd Psi(t.dim(), 2 * t.size());
  Psi << t.anchors, t.negatives - t.positives;
  return Psi * m.A;
}

}  // namespace

TEST_CASE("equal positives and negatives give a zero K2") {
  TripletSet t = random_triplets(3, 6, 1);
  t.positives = t.negatives;
  for (const KernelSpec& s : {KernelSpec::gaussian(0.5), KernelSpec::linear()}) {
    const ContrastiveSystem sys = assemble_contrastive_system(t, s);
    CHECK(sys.K3.isZero(0.0));
    CHECK(sys.K_delta.isZero(0.0));
    CHECK(sys.K2.isZero(0.0));
  }
  const SimpleContrastiveModel m = fit_simple(t, KernelSpec::gaussian(0.5), 2);
  CHECK(std::abs(m.objective) <= 1e-12);
  const ContrastiveSystem sys = assemble_contrastive_system(t, KernelSpec::gaussian(0.5));
  CHECK(testutil::max_abs(m.A.transpose() * sys.K1 * m.A - MatrixXd::Identity(2, 2)) <= 1e-6);
  // lower block of the stacked features vanishes
  const VectorXd f = m.features(testutil::random_matrix(3, 1, 9).col(0));
  CHECK(f.tail(6).isZero(0.0));
}

TEST_CASE("linear K1 equals the explicit feature Gram") {
  const TripletSet t = random_triplets(2, 2, 3);
  const ContrastiveSystem sys = assemble_contrastive_system(t, KernelSpec::linear());
  MatrixXd Psi(2, 4);
  Psi << t.anchors, t.negatives - t.positives;
  CHECK((sys.K1 - Psi.transpose() * Psi).norm() <= 1e-12);
  const MatrixXd Delta = t.negatives - t.positives;
  CHECK((sys.B - Psi.transpose() * Delta * t.anchors.transpose() * Psi).norm() <= 1e-12);
}

TEST_CASE("assembled blocks are symmetric") {
  const TripletSet t = random_triplets(3, 8, 5);
  for (const KernelSpec& s :
       {KernelSpec::gaussian(0.5), KernelSpec::laplacian(0.5), KernelSpec::linear(), KernelSpec::relu_ntk(2)}) {
    const ContrastiveSystem sys = assemble_contrastive_system(t, s);
    CHECK(testutil::max_abs(sys.K1 - sys.K1.transpose()) <= 1e-10);
    CHECK(testutil::max_abs(sys.K2 - sys.K2.transpose()) <= 1e-10);
  }
}

TEST_CASE("linear objective matches the explicit trace optimum") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TripletSet t = random_triplets(3, 10, 100 + seed);
    for (int h : {1, 2}) {
      const SimpleContrastiveModel m = fit_simple(t, KernelSpec::linear(), h);
      CHECK(m.objective == doctest::Approx(explicit_optimum(t, h)).epsilon(1e-6).scale(1.0));
      const MatrixXd W = explicit_W(m);
      CHECK(testutil::max_abs(W.transpose() * W - MatrixXd::Identity(h, h)) <= 1e-6);
      CHECK(explicit_loss(t, W) == doctest::Approx(m.objective).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("objective equals the loss of the returned coefficients") {
  const TripletSet t = random_triplets(4, 12, 7);
  const KernelSpec s = KernelSpec::gaussian(0.3);
  const SimpleContrastiveModel m = fit_simple(t, s, 3);
  const ContrastiveSystem sys = assemble_contrastive_system(t, s);
  CHECK(simple_contrastive_loss(sys, m.A) == doctest::Approx(m.objective).epsilon(1e-8).scale(1.0));
  for (Index i = 1; i < m.top_eigenvalues.size(); ++i) CHECK(m.top_eigenvalues(i - 1) >= m.top_eigenvalues(i));
}

TEST_CASE("linear fit beats random orthonormal maps") {
  const TripletSet t = random_triplets(3, 8, 11);
  const SimpleContrastiveModel m = fit_simple(t, KernelSpec::linear(), 2);
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const Eigen::HouseholderQR<MatrixXd> qr(testutil::random_matrix(3, 2, 5000 + k));
    const MatrixXd W = qr.householderQ() * MatrixXd::Identity(3, 2);
    CHECK(m.objective <= explicit_loss(t, W) + 1e-10);
  }
}

TEST_CASE("linear embedding is the explicit map") {
  const TripletSet t = random_triplets(3, 10, 13);
  const SimpleContrastiveModel m = fit_simple(t, KernelSpec::linear(), 2);
  const MatrixXd W = explicit_W(m);
  const MatrixXd Q = testutil::random_matrix(3, 5, 14);
  CHECK((m.embed_batch(Q) - W.transpose() * Q).norm() <= 1e-8);
  for (Index j = 0; j < Q.cols(); ++j) CHECK((m.embed(Q.col(j)) - W.transpose() * Q.col(j)).norm() <= 1e-8);
}

TEST_CASE("embedding an anchor reproduces the training column") {
  const TripletSet t = random_triplets(3, 9, 15);
  const KernelSpec s = KernelSpec::laplacian(0.7);
  const SimpleContrastiveModel m = fit_simple(t, s, 2);
  const ContrastiveSystem sys = assemble_contrastive_system(t, s);
  const MatrixXd train = m.A.transpose() * sys.K1;
  for (Index i = 0; i < t.size(); ++i) {
    CHECK((m.features(t.anchors.col(i)) - sys.K1.col(i)).norm() <= 1e-12);
    CHECK((m.embed(t.anchors.col(i)) - train.col(i)).norm() <= 1e-10);
  }
}

TEST_CASE("stationary kernels give translation invariant systems") {
  TripletSet t = random_triplets(2, 7, 17);
  const VectorXd c = testutil::random_matrix(2, 1, 18, 5.0).col(0);
  TripletSet shifted = t;
  shifted.anchors.colwise() += c;
  shifted.positives.colwise() += c;
  shifted.negatives.colwise() += c;
  for (const KernelSpec& s : {KernelSpec::gaussian(0.8), KernelSpec::laplacian(0.8)}) {
    const ContrastiveSystem a = assemble_contrastive_system(t, s), b = assemble_contrastive_system(shifted, s);
    CHECK(testutil::max_abs(a.K1 - b.K1) <= 1e-10);
    CHECK(testutil::max_abs(a.K2 - b.K2) <= 1e-10);
    CHECK(fit_simple(t, s, 2).objective == doctest::Approx(fit_simple(shifted, s, 2).objective).epsilon(1e-10));
  }
}

TEST_CASE("duplicated anchors still fit") {
  TripletSet t = random_triplets(3, 10, 19);
  t.anchors.col(4) = t.anchors.col(2);
  t.positives.col(4) = t.positives.col(2);
  t.negatives.col(4) = t.negatives.col(2);
  for (const KernelSpec& s : {KernelSpec::gaussian(1.0), KernelSpec::linear()}) {
    const SimpleContrastiveModel m = fit_simple(t, s, 2, 1e-10);
    const ContrastiveSystem sys = assemble_contrastive_system(t, s);
    CHECK(testutil::max_abs(m.A.transpose() * sys.K1 * m.A - MatrixXd::Identity(2, 2)) <= 1e-6);
  }
}

TEST_CASE("fit preconditions") {
  const TripletSet t = random_triplets(2, 3, 21);
  CHECK_THROWS_AS(fit_simple(t, KernelSpec::gaussian(1.0), 4), InputError);
  CHECK_THROWS_AS(fit_simple(t, KernelSpec::gaussian(1.0), 0), InputError);
  CHECK_THROWS_AS(fit_simple(t, KernelSpec::gaussian(1.0), 1).embed(VectorXd::Zero(3)), InputError);
  TripletSet bad = t;
  bad.positives = MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(assemble_contrastive_system(bad, KernelSpec::linear()), InputError);
}

TEST_CASE("negative eigenvalues raise the warning flag but still fit") {
  // Delta = Phi makes the explicit loss matrix positive definite, so every
  // eigenvalue of the maximisation problem is negative
  TripletSet t;
  t.anchors = testutil::random_matrix(2, 3, 23);
  t.positives = t.anchors;
  t.negatives = 2.0 * t.anchors;
  t.negative_source = {1, 2, 0};
  const SimpleContrastiveModel m = fit_simple(t, KernelSpec::linear(), 2);
  CHECK(m.eigen_warning);
  CHECK(m.top_eigenvalues.maxCoeff() < 0.0);
  CHECK(m.objective == doctest::Approx(explicit_optimum(t, 2)).epsilon(1e-8));
  const ContrastiveSystem sys = assemble_contrastive_system(t, KernelSpec::linear());
  CHECK(testutil::max_abs(m.A.transpose() * sys.K1 * m.A - MatrixXd::Identity(2, 2)) <= 1e-6);
}

TEST_CASE("non-negative spectrum leaves the warning unset") {
  const TripletSet t = random_triplets(3, 10, 25);
  const SimpleContrastiveModel m = fit_simple(t, KernelSpec::gaussian(0.5), 1);
  CHECK(m.eigen_warning == (m.top_eigenvalues(0) < 0.0));
}
