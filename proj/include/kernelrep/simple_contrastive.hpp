#pragma once

#include <Eigen/Dense>

#include "kernelrep/datasets.hpp"
#include "kernelrep/kernels.hpp"
#include "kernelrep/linalg.hpp"

namespace kernelrep {

/// Kernel blocks of the closed-form contrastive problem. With
/// Psi = [Phi, Delta], Delta_i = phi(x_i^-) - phi(x_i^+):
///   K1 = Psi^T Psi,  B = Psi^T Delta Phi^T Psi,  K2 = -(B + B^T) / 2.
struct ContrastiveSystem {
  MatrixXd K;        // k(x_i, x_j)
  MatrixXd K_minus;  // k(x_i, x_j^-)
  MatrixXd K_plus;   // k(x_i, x_j^+)
  MatrixXd K3;       // K_minus - K_plus
  MatrixXd K_delta;  // Delta^T Delta
  MatrixXd K1;       // [[K, K3], [K3^T, K_delta]]
  MatrixXd B;        // [K3; K_delta] * [K, K3]
  MatrixXd K2;
};

ContrastiveSystem assemble_contrastive_system(const TripletSet& triplets, const KernelSpec& spec);

/// Closed-form contrastive embedding W = [Phi, Delta] A with W^T W = I_h.
struct SimpleContrastiveModel {
  KernelSpec spec;
  int h = 0;
  MatrixXd A;  // 2n x h
  TripletSet triplets;
  VectorXd top_eigenvalues;
  /// Training loss sum_i f(x_i)^T (f(x_i^-) - f(x_i^+)) = -sum(top_eigenvalues).
  double objective = 0.0;
  /// Set when fewer than h of the selected eigenvalues are non-negative.
  bool eigen_warning = false;
  double jitter_scale = kDefaultJitter;

  /// Stacked kernel features [k(x, X); k(x, X^-) - k(x, X^+)] (length 2n).
  VectorXd features(const VectorXd& x) const;
  VectorXd embed(const VectorXd& x) const;
  /// Embeds every column of X (d x m) into an h x m matrix.
  MatrixXd embed_batch(const MatrixXd& X) const;
};

/// Solves the trace maximisation max Tr(A^T K2 A) s.t. A^T K1 A = I_h.
/// K1 eigen-directions with eigenvalue at or below
/// jitter_scale * trace(K1) / 2n are treated as its null space.
SimpleContrastiveModel fit_simple(const TripletSet& triplets, const KernelSpec& spec, int h,
                                  double jitter_scale = kDefaultJitter);

/// Loss sum_i f(x_i)^T (f(x_i^-) - f(x_i^+)) for coefficients A, i.e. Tr(A^T B A).
double simple_contrastive_loss(const ContrastiveSystem& system, const MatrixXd& A);

}  // namespace kernelrep
