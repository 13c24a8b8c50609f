#include "kernelrep/kpca.hpp"

#include <algorithm>
#include <string>

#include "kernelrep/error.hpp"
#include "kernelrep/linalg.hpp"

namespace kernelrep {

KPCAModel fit_kpca(const MatrixXd& X, const KernelSpec& spec, int h) {
  const Index n = X.cols();
  if (h < 1) throw InputError("fit_kpca: h must be >= 1");
  if (h > n) throw InputError("fit_kpca: h must not exceed the sample count");

  const MatrixXd K = gram(spec, X);
  KPCAModel model;
  model.spec = spec;
  model.X_train = X;
  model.row_means = K.colwise().mean().transpose();
  model.total_mean = model.row_means.mean();

  MatrixXd Kc = K;
  Kc.rowwise() -= model.row_means.transpose();
  Kc.colwise() -= model.row_means;
  Kc.array() += model.total_mean;
  Kc = symmetrized(Kc);

  const SymEig eig = sym_eig(Kc);
  // relative to the trace, with an absolute floor for an all-but-zero Kc
  const double cutoff = std::max(1e-12 * std::max(0.0, Kc.trace()), 1e-13 * K.cwiseAbs().maxCoeff());
  Index rank = 0;
  while (rank < n && eig.values(rank) > cutoff) ++rank;
  if (rank < h) {
    throw RankError("fit_kpca: centred Gram has numerical rank " + std::to_string(rank) +
                    " < h = " + std::to_string(h));
  }
  model.eigenvalues = eig.values.head(h);
  model.alphas = eig.vectors.leftCols(h) * model.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
  model.train_embedding = (eig.vectors.leftCols(h) * model.eigenvalues.cwiseSqrt().asDiagonal()).transpose();
  return model;
}

VectorXd KPCAModel::embed(const VectorXd& x) const {
  if (x.size() != X_train.rows()) throw InputError("embed: query dimension does not match training data");
  VectorXd k = kernel_column(spec, X_train, x);
  const double mean = k.mean();
  k = k - row_means;
  k.array() += total_mean - mean;
  return alphas.transpose() * k;
}

MatrixXd KPCAModel::embed_batch(const MatrixXd& X) const {
  if (X.rows() != X_train.rows()) throw InputError("embed: query dimension does not match training data");
  MatrixXd k = gram(spec, X_train, X);
  const VectorXd col_means = k.colwise().mean().transpose();
  k.colwise() -= row_means;
  k.rowwise() -= col_means.transpose();
  k.array() += total_mean;
  return alphas.transpose() * k;
}

}  // namespace kernelrep
