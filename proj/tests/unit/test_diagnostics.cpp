#include <cmath>

#include <doctest.h>

#include "kernelrep/datasets.hpp"
#include "kernelrep/diagnostics.hpp"
#include "test_util.hpp"

using namespace kernelrep;

namespace {

TripletSet random_triplets(Index d, Index n, std::uint64_t seed) {
  return make_triplets(testutil::random_matrix(d, n, seed), 0.3, seed + 1);
}

}  // namespace

TEST_CASE("gaussian complexity terms have closed forms") {
  const TripletSet t = random_triplets(3, 17, 1);
  for (int h : {1, 2, 5}) {
    const ComplexityTerms c = complexity_terms(t, KernelSpec::gaussian(0.4), h);
    CHECK(c.kappa == 1.0);
    CHECK(c.alpha == 3.0 * std::sqrt(static_cast<double>(h) * 17.0));
  }
}

TEST_CASE("linear kappa is the largest squared norm") {
  const TripletSet t = random_triplets(3, 9, 2);
  double expected = 0.0;
  for (const MatrixXd* M : {&t.anchors, &t.positives, &t.negatives}) {
    expected = std::max(expected, M->colwise().squaredNorm().maxCoeff());
  }
  CHECK(complexity_terms(t, KernelSpec::linear(), 2).kappa == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("alpha scales with the square root of h") {
  const TripletSet t = random_triplets(2, 11, 3);
  for (const KernelSpec& s : {KernelSpec::laplacian(0.5), KernelSpec::linear(), KernelSpec::relu_ntk(3)}) {
    const double a1 = complexity_terms(t, s, 3).alpha, a2 = complexity_terms(t, s, 6).alpha;
    CHECK(a2 == doctest::Approx(std::sqrt(2.0) * a1).epsilon(1e-14));
  }
  const MatrixXd X = testutil::random_matrix(2, 8, 4);
  CHECK(complexity_terms(X, KernelSpec::linear(), 4).alpha ==
        doctest::Approx(std::sqrt(2.0) * complexity_terms(X, KernelSpec::linear(), 2).alpha).epsilon(1e-14));
}

TEST_CASE("gamma per decoder family") {
  CHECK(gamma_of(KernelSpec::gaussian(3.0)) == 1.0);
  CHECK(gamma_of(KernelSpec::laplacian(3.0)) == 1.0);
  CHECK(gamma_of(KernelSpec::linear()) == 1.0);
  CHECK(gamma_of(KernelSpec::relu_ntk(2)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(gamma_of(KernelSpec::relu_ntk(4)) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("simple contrastive norm equals h") {
  const TripletSet t = random_triplets(3, 12, 5);
  for (int h : {1, 2, 3}) {
    const SimpleContrastiveModel m = fit_simple(t, KernelSpec::gaussian(0.5), h);
    CHECK(std::abs(model_norm(m) - h) <= 1e-4);
  }
}

TEST_CASE("spectral norm of a zero embedding is zero") {
  const TripletSet t = random_triplets(2, 4, 6);
  OptimOptions o;
  o.max_iters = 0;
  SpectralModel m = fit_spectral(t, KernelSpec::gaussian(1.0), 2, 1.0, o, 1);
  m.Z.setZero();
  refresh_spectral(m);
  CHECK(model_norm(m) == 0.0);
}

TEST_CASE("linear spectral norm matches the explicit W") {
  const TripletSet t = random_triplets(10, 3, 7);
  OptimOptions o;
  o.max_iters = 10;
  SpectralModel m = fit_spectral(t, KernelSpec::linear(), 2, 1.0, o, 2, 1e-12);
  // distinct points so K = P^T P is invertible
  m.points = testutil::random_matrix(10, 9, 70);
  refresh_spectral(m);
  const MatrixXd W = m.points * m.coeffs;
  CHECK(std::abs(model_norm(m) - W.squaredNorm()) <= 1e-6 * std::max(1.0, W.squaredNorm()));
}

TEST_CASE("kernel PCA norm equals h") {
  const MatrixXd X = testutil::random_matrix(3, 10, 8);
  CHECK(model_norm(fit_kpca(X, KernelSpec::gaussian(0.5), 3)) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("autoencoder norms are the objective traces") {
  const MatrixXd X = testutil::random_matrix(3, 10, 9);
  OptimOptions o;
  o.max_iters = 5;
  const KernelAEModel m = fit_ae(X, KernelSpec::gaussian(0.5), KernelSpec::gaussian(1.0), 2, 0.1, o, 3);
  const AeNorms norms = model_norms(m);
  const AeTerms t = m.terms();
  CHECK(norms.encoder == t.encoder_norm);
  CHECK(norms.decoder == t.decoder_norm);
  CHECK(norms.encoder >= 0.0);
  CHECK(norms.decoder >= 0.0);
}
