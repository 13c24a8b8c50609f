#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "kernelrep/kernels.hpp"
#include "kernelrep/linalg.hpp"
#include "kernelrep/optim.hpp"

namespace kernelrep {

/// Inputs of the kernel autoencoder objective. `X_enc` is what the encoder
/// sees (the corrupted copy in de-noising mode); `X_train` is the target.
struct AeProblem {
  MatrixXd X_train;
  MatrixXd X_enc;
  KernelSpec spec_enc;
  KernelSpec spec_dec;
  double lambda = 1.0;
  double jitter_scale = kDefaultJitter;
};

/// Q(Z) = X (K_Z + lambda I)^{-1} K_Z, the ridge reconstruction of the targets.
MatrixXd ae_reconstruction(const MatrixXd& Z, const MatrixXd& X_train, const KernelSpec& spec_dec,
                           double lambda);

struct AeTerms {
  double reconstruction = 0.0;  // ||Q - X||^2
  double encoder_norm = 0.0;    // Tr(Z K_X^{-1} Z^T)
  double decoder_norm = 0.0;    // Tr(Q K_Z^{-1} Q^T), via X R K_Z R X^T with R = (K_Z + lambda I)^{-1}
  double total = 0.0;           // reconstruction + lambda (encoder_norm + decoder_norm)
};

/// Objective and gradient over unit-norm bottlenecks Z (h x n). The encoder
/// Gram K_X is factorised once per instance.
class AeObjective {
 public:
  explicit AeObjective(AeProblem problem);

  const AeProblem& problem() const { return problem_; }
  const ShiftedSolver& encoder_solver() const { return *enc_; }
  std::shared_ptr<const ShiftedSolver> shared_encoder_solver() const { return enc_; }

  AeTerms terms(const MatrixXd& Z) const;
  double value(const MatrixXd& Z) const { return terms(Z).total; }
  /// Euclidean gradient in Z. Supported decoder kernels: gaussian, linear,
  /// laplacian (sign subgradient, zero at coordinate ties).
  MatrixXd grad(const MatrixXd& Z) const;

 private:
  void check(const MatrixXd& Z) const;

  AeProblem problem_;
  std::shared_ptr<const ShiftedSolver> enc_;
};

double ae_objective(const MatrixXd& Z, const AeProblem& problem);
MatrixXd ae_grad(const MatrixXd& Z, const AeProblem& problem);

struct KernelAEModel {
  MatrixXd Z;        // h x n, unit-norm columns
  MatrixXd X_train;  // d x n reconstruction targets
  MatrixXd X_enc;    // d x n encoder inputs
  KernelSpec spec_enc;
  KernelSpec spec_dec;
  double lambda = 1.0;
  double jitter_scale = kDefaultJitter;
  bool denoising = false;
  bool random_init = false;
  OptimTrace trace;

  std::shared_ptr<const ShiftedSolver> K_inv;  // jittered K_X over X_enc
  MatrixXd enc_coeffs;                         // K_X^{-1} Z^T (n x h)
  MatrixXd dec_coeffs;                         // X_train (K_Z + lambda I)^{-1} (d x n)

  Index h() const { return Z.rows(); }
  VectorXd embed(const VectorXd& x) const;
  MatrixXd embed_batch(const MatrixXd& X) const;
  VectorXd reconstruct(const VectorXd& x) const;
  MatrixXd reconstruct_batch(const MatrixXd& X) const;
  /// Training reconstruction Q(Z).
  MatrixXd reconstruction() const;
  AeTerms terms() const;
};

struct AeFitOptions {
  bool denoising = false;
  /// Corruption level used when denoising and no corrupted copy is supplied.
  double noise_sd = 0.1;
  /// Encoder inputs for de-noising mode; generated with corrupt() when unset.
  std::optional<MatrixXd> corrupted;
  double jitter_scale = kDefaultJitter;
};

/// Projected gradient descent: gradient step along the sphere tangent, then
/// every column of Z is renormalised. Initialised from normalised kernel PCA
/// scores of the encoder inputs (seeded random unit vectors as fallback).
/// Returns the best iterate seen.
KernelAEModel fit_ae(const MatrixXd& X, const KernelSpec& spec_enc, const KernelSpec& spec_dec, int h,
                     double lambda, const OptimOptions& opt, std::uint64_t seed,
                     const AeFitOptions& options = {});

/// Recomputes the cached factorisations of a model whose fields were set directly.
void refresh_ae(KernelAEModel& model);

/// Normalises every column to unit Euclidean norm; zero columns are left as is.
MatrixXd normalize_columns(const MatrixXd& Z);

}  // namespace kernelrep
