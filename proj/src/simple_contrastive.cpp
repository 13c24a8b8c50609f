#include "kernelrep/simple_contrastive.hpp"

#include <cmath>
#include <string>

#include "kernelrep/error.hpp"

namespace kernelrep {

ContrastiveSystem assemble_contrastive_system(const TripletSet& triplets, const KernelSpec& spec) {
  triplets.validate();
  const Index n = triplets.size();
  ContrastiveSystem s;
  s.K = gram(spec, triplets.anchors);
  s.K_minus = gram(spec, triplets.anchors, triplets.negatives);
  s.K_plus = gram(spec, triplets.anchors, triplets.positives);
  const MatrixXd K_mm = gram(spec, triplets.negatives);
  const MatrixXd K_pp = gram(spec, triplets.positives);
  const MatrixXd K_mp = gram(spec, triplets.negatives, triplets.positives);

  s.K3 = s.K_minus - s.K_plus;
  s.K_delta = symmetrized(K_mm + K_pp - K_mp - K_mp.transpose());

  s.K1.resize(2 * n, 2 * n);
  s.K1.topLeftCorner(n, n) = s.K;
  s.K1.topRightCorner(n, n) = s.K3;
  s.K1.bottomLeftCorner(n, n) = s.K3.transpose();
  s.K1.bottomRightCorner(n, n) = s.K_delta;

  MatrixXd left(2 * n, n);
  left << s.K3, s.K_delta;
  MatrixXd right(n, 2 * n);
  right << s.K, s.K3;
  s.B = left * right;
  s.K2 = -0.5 * (s.B + s.B.transpose());
  return s;
}

double simple_contrastive_loss(const ContrastiveSystem& system, const MatrixXd& A) {
  if (A.rows() != system.B.rows()) throw InputError("coefficient matrix must have 2n rows");
  return (A.transpose() * system.B * A).trace();
}

SimpleContrastiveModel fit_simple(const TripletSet& triplets, const KernelSpec& spec, int h,
                                  double jitter_scale) {
  triplets.validate();
  const Index n = triplets.size();
  if (h < 1) throw InputError("fit_simple: embedding dimension h must be >= 1");
  if (h > n) throw InputError("fit_simple: h must not exceed the number of triplets");

  const ContrastiveSystem sys = assemble_contrastive_system(triplets, spec);

  // Whiten on the numerical range of K1: A = U_r diag(mu_r)^{-1/2} A2, so that
  // A^T K1 A = A2^T A2 holds exactly for the retained directions.
  const double floor = std::max(jitter_shift(sys.K1, jitter_scale),
                                1e-14 * std::max(1.0, sys.K1.cwiseAbs().maxCoeff()));
  const PsdRange range = psd_range(sys.K1, floor);
  const Index r = range.basis.cols();
  if (r < h) {
    throw RankError("fit_simple: K1 has numerical rank " + std::to_string(r) + " < h = " +
                    std::to_string(h) + "; lower h or raise the augmentation");
  }
  const VectorXd inv_root = range.values.cwiseSqrt().cwiseInverse();
  const MatrixXd whiten = range.basis * inv_root.asDiagonal();  // 2n x r
  const MatrixXd reduced = symmetrized(whiten.transpose() * sys.K2 * whiten);
  const SymEig eig = sym_eig(reduced);

  SimpleContrastiveModel model;
  model.spec = spec;
  model.h = h;
  model.triplets = triplets;
  model.jitter_scale = jitter_scale;
  model.top_eigenvalues = eig.values.head(h);
  model.A = whiten * eig.vectors.leftCols(h);
  model.objective = -model.top_eigenvalues.sum();
  model.eigen_warning = model.top_eigenvalues.minCoeff() < 0.0;
  return model;
}

VectorXd SimpleContrastiveModel::features(const VectorXd& x) const {
  const Index n = triplets.size();
  VectorXd out(2 * n);
  out.head(n) = kernel_column(spec, triplets.anchors, x);
  out.tail(n) = kernel_column(spec, triplets.negatives, x) - kernel_column(spec, triplets.positives, x);
  return out;
}

VectorXd SimpleContrastiveModel::embed(const VectorXd& x) const {
  if (x.size() != triplets.dim()) throw InputError("embed: query dimension does not match training data");
  return A.transpose() * features(x);
}

MatrixXd SimpleContrastiveModel::embed_batch(const MatrixXd& X) const {
  if (X.rows() != triplets.dim()) throw InputError("embed: query dimension does not match training data");
  const Index n = triplets.size();
  MatrixXd F(2 * n, X.cols());
  F.topRows(n) = gram(spec, triplets.anchors, X);
  F.bottomRows(n) = gram(spec, triplets.negatives, X) - gram(spec, triplets.positives, X);
  return A.transpose() * F;
}

}  // namespace kernelrep
