#pragma once

#include <cstdint>
#include <memory>

#include "kernelrep/datasets.hpp"
#include "kernelrep/kernels.hpp"
#include "kernelrep/linalg.hpp"
#include "kernelrep/optim.hpp"

namespace kernelrep {

/// Objective  sum_i -2 z_i^T z_{i+n} + (z_i^T z_{i+2n})^2 + lambda Tr(Z K^{-1} Z^T)
/// over Z (h x 3n), columns ordered anchors, positives, negatives.
double spectral_loss(const MatrixXd& Z, const ShiftedSolver& K_inv, double lambda);
double spectral_loss(const MatrixXd& Z, const MatrixXd& K, double lambda,
                     double jitter_scale = kDefaultJitter);

/// Gradient of spectral_loss with respect to Z.
MatrixXd spectral_grad(const MatrixXd& Z, const ShiftedSolver& K_inv, double lambda);
MatrixXd spectral_grad(const MatrixXd& Z, const MatrixXd& K, double lambda,
                       double jitter_scale = kDefaultJitter);

/// Regulariser Tr(Z K^{-1} Z^T), the squared RKHS norm of W = Phi K^{-1} Z^T.
double spectral_norm_sq(const MatrixXd& Z, const ShiftedSolver& K_inv);

struct SpectralModel {
  KernelSpec spec;
  double lambda = 0.0;
  double jitter_scale = kDefaultJitter;
  MatrixXd Z;       // h x 3n
  MatrixXd points;  // d x 3n: [X, X+, X-]
  std::shared_ptr<const ShiftedSolver> K_inv;
  MatrixXd coeffs;  // K^{-1} Z^T (3n x h)
  OptimTrace trace;

  Index h() const { return Z.rows(); }
  VectorXd embed(const VectorXd& x) const;
  MatrixXd embed_batch(const MatrixXd& X) const;
  double norm_sq() const;
};

/// Stacks triplets into the 3n-column training matrix [X, X+, X-].
MatrixXd stack_triplets(const TripletSet& triplets);

/// Plain gradient descent from Z ~ N(0, 0.1^2), with optional Armijo backtracking.
SpectralModel fit_spectral(const TripletSet& triplets, const KernelSpec& spec, int h, double lambda,
                           const OptimOptions& opt, std::uint64_t seed,
                           double jitter_scale = kDefaultJitter);

/// Rebuilds the cached factorisation after Z / points / spec were set directly.
void refresh_spectral(SpectralModel& model);

}  // namespace kernelrep
