#include "kernelrep/diagnostics.hpp"

#include <cmath>

#include "kernelrep/error.hpp"

namespace kernelrep {

ComplexityTerms complexity_terms(const TripletSet& triplets, const KernelSpec& spec, int h) {
  if (h < 1) throw InputError("complexity_terms: h must be >= 1");
  triplets.validate();
  const VectorXd da = gram_diagonal(spec, triplets.anchors);
  const VectorXd dn = gram_diagonal(spec, triplets.negatives);
  const VectorXd dp = gram_diagonal(spec, triplets.positives);
  const double hd = static_cast<double>(h);
  ComplexityTerms out;
  out.alpha = std::sqrt(hd * da.sum()) + std::sqrt(hd * dn.sum()) + std::sqrt(hd * dp.sum());
  out.kappa = std::max({da.maxCoeff(), dn.maxCoeff(), dp.maxCoeff()});
  return out;
}

ComplexityTerms complexity_terms(const MatrixXd& X, const KernelSpec& spec, int h) {
  if (h < 1) throw InputError("complexity_terms: h must be >= 1");
  if (X.cols() < 1) throw InputError("complexity_terms: no samples");
  const VectorXd d = gram_diagonal(spec, X);
  return {std::sqrt(static_cast<double>(h) * d.sum()), d.maxCoeff()};
}

double gamma_of(const KernelSpec& spec_dec) {
  spec_dec.validate();
  switch (spec_dec.family) {
    case KernelFamily::gaussian:
    case KernelFamily::laplacian:
    case KernelFamily::linear:
      return 1.0;
    case KernelFamily::relu_ntk:
      return relu_ntk_of_inner(1.0, spec_dec.depth);
  }
  return 0.0;
}

double model_norm(const SimpleContrastiveModel& model) {
  const ContrastiveSystem sys = assemble_contrastive_system(model.triplets, model.spec);
  return (model.A.transpose() * sys.K1 * model.A).trace();
}

double model_norm(const SpectralModel& model) { return model.norm_sq(); }

double model_norm(const KPCAModel& model) {
  // alphas^T K_c alphas = diag(mu)^{-1/2} V^T K_c V diag(mu)^{-1/2}
  const MatrixXd K = gram(model.spec, model.X_train);
  MatrixXd Kc = K;
  Kc.rowwise() -= model.row_means.transpose();
  Kc.colwise() -= model.row_means;
  Kc.array() += model.total_mean;
  return (model.alphas.transpose() * Kc * model.alphas).trace();
}

AeNorms model_norms(const KernelAEModel& model) {
  const AeTerms t = model.terms();
  return {t.encoder_norm, t.decoder_norm};
}

}  // namespace kernelrep
