#pragma once

#include "kernelrep/datasets.hpp"
#include "kernelrep/kernel_ae.hpp"
#include "kernelrep/kernels.hpp"
#include "kernelrep/kpca.hpp"
#include "kernelrep/simple_contrastive.hpp"
#include "kernelrep/spectral_contrastive.hpp"

namespace kernelrep {

/// Computable quantities from the generalisation bounds, plus fitted norms.
/// w_norm_sq is the fitted ||W||^2 (encoder + decoder for the autoencoder),
/// an empirical stand-in for the norm budget omega^2 of the hypothesis class.
struct BoundReport {
  double alpha = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double r = 0.0;
  double w_norm_sq = 0.0;
  double w2_norm_sq = 0.0;  // decoder norm (autoencoder only)
  Index n = 0;
};

struct ComplexityTerms {
  double alpha = 0.0;
  double kappa = 0.0;
};

/// alpha = sqrt(h Tr K_X) + sqrt(h Tr K_X-) + sqrt(h Tr K_X+);
/// kappa = max k(x', x') over all triplet points.
ComplexityTerms complexity_terms(const TripletSet& triplets, const KernelSpec& spec, int h);
/// Single-sample-set variant: alpha = sqrt(h Tr K_X), kappa = max k(x, x).
ComplexityTerms complexity_terms(const MatrixXd& X, const KernelSpec& spec, int h);

/// max k(s, s) over the unit sphere: 1 for gaussian, laplacian and linear;
/// the NTK recursion at u = 1 (equal to the depth) for relu_ntk.
double gamma_of(const KernelSpec& spec_dec);

/// Tr(A^T K1 A); equals h for a fitted model.
double model_norm(const SimpleContrastiveModel& model);
/// Tr(Z K^{-1} Z^T).
double model_norm(const SpectralModel& model);
/// Tr(alphas^T K_c alphas); equals h.
double model_norm(const KPCAModel& model);

struct AeNorms {
  double encoder = 0.0;  // Tr(Z K_X^{-1} Z^T)
  double decoder = 0.0;  // Tr(Q K_Z^{-1} Q^T)
};
AeNorms model_norms(const KernelAEModel& model);

}  // namespace kernelrep
