#pragma once

#include "kernelrep/kernels.hpp"

namespace kernelrep {

/// Kernel PCA on the double-centred Gram matrix.
struct KPCAModel {
  KernelSpec spec;
  MatrixXd X_train;     // d x n
  MatrixXd alphas;      // n x h, column j = v_j / sqrt(mu_j)
  VectorXd eigenvalues; // top h eigenvalues of the centred Gram
  VectorXd row_means;   // mean_i k(x_i, x_j) for each training j
  double total_mean = 0.0;
  /// Training embeddings (h x n).
  MatrixXd train_embedding;

  Index h() const { return alphas.cols(); }
  VectorXd embed(const VectorXd& x) const;
  MatrixXd embed_batch(const MatrixXd& X) const;
};

/// Throws RankError when h exceeds the numerical rank of the centred Gram
/// (eigenvalues at or below 1e-12 * trace are discarded).
KPCAModel fit_kpca(const MatrixXd& X, const KernelSpec& spec, int h);

}  // namespace kernelrep
