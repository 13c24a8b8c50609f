#pragma once

#include <Eigen/Dense>

namespace kernelrep {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Default relative jitter: every Gram inverse is taken of K + eps I with
/// eps = jitter_scale * trace(K) / m.
inline constexpr double kDefaultJitter = 1e-10;

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending. The first
/// nonzero component of every eigenvector is positive.
struct SymEig {
  VectorXd values;
  MatrixXd vectors;
};

SymEig sym_eig(const MatrixXd& M);

/// Absolute jitter jitter_scale * trace(M) / m for a square matrix.
double jitter_shift(const MatrixXd& M, double jitter_scale);

/// (M + eps I)^{-1/2} for symmetric PSD M, eps from jitter_shift().
/// Throws NotPsdError for eigenvalues below -1e-6 * ||M||_2 and
/// SingularError when a shifted eigenvalue is not positive.
MatrixXd inv_sqrt_psd(const MatrixXd& M, double jitter_scale = kDefaultJitter);

/// Orthonormal basis of the numerical range of a PSD matrix together with
/// the matching eigenvalues (descending). Eigenvalues at or below `floor`
/// are treated as zero.
struct PsdRange {
  MatrixXd basis;
  VectorXd values;
};

PsdRange psd_range(const MatrixXd& M, double floor);

/// (K + lambda I)^{-1} B for symmetric PSD K.
MatrixXd ridge_solve(const MatrixXd& K, double lambda, const MatrixXd& B);

/// Factorisation of K + shift I, reused across many solves.
class ShiftedSolver {
 public:
  ShiftedSolver() = default;
  ShiftedSolver(const MatrixXd& K, double shift);

  /// Factorises K + eps I with eps = jitter_shift(K, jitter_scale).
  static ShiftedSolver jittered(const MatrixXd& K, double jitter_scale);

  MatrixXd solve(const MatrixXd& B) const;
  VectorXd solve(const VectorXd& b) const;

  Eigen::Index size() const { return ldlt_.rows(); }
  double shift() const { return shift_; }

 private:
  Eigen::LDLT<MatrixXd> ldlt_;
  double shift_ = 0.0;
};

/// Makes a square matrix exactly symmetric: (M + M^T) / 2.
MatrixXd symmetrized(const MatrixXd& M);

}  // namespace kernelrep
