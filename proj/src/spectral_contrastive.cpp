#include "kernelrep/spectral_contrastive.hpp"

#include <cmath>
#include <random>

#include "kernelrep/error.hpp"

namespace kernelrep {

namespace {

void check_shapes(const MatrixXd& Z, Index k_size) {
  if (Z.cols() % 3 != 0 || Z.cols() == 0) throw InputError("spectral: Z must have 3n columns");
  if (Z.cols() != k_size) throw InputError("spectral: Z column count does not match K");
}

double pair_terms(const MatrixXd& Z) {
  const Index n = Z.cols() / 3;
  double out = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double neg = Z.col(i).dot(Z.col(i + 2 * n));
    out += -2.0 * Z.col(i).dot(Z.col(i + n)) + neg * neg;
  }
  return out;
}

}  // namespace

double spectral_norm_sq(const MatrixXd& Z, const ShiftedSolver& K_inv) {
  check_shapes(Z, K_inv.size());
  const MatrixXd Y = K_inv.solve(MatrixXd(Z.transpose()));
  return (Z.transpose().array() * Y.array()).sum();
}

double spectral_loss(const MatrixXd& Z, const ShiftedSolver& K_inv, double lambda) {
  check_shapes(Z, K_inv.size());
  if (lambda < 0.0) throw InputError("spectral: lambda must be non-negative");
  const double reg = lambda == 0.0 ? 0.0 : lambda * spectral_norm_sq(Z, K_inv);
  return pair_terms(Z) + reg;
}

double spectral_loss(const MatrixXd& Z, const MatrixXd& K, double lambda, double jitter_scale) {
  return spectral_loss(Z, ShiftedSolver::jittered(K, jitter_scale), lambda);
}

MatrixXd spectral_grad(const MatrixXd& Z, const ShiftedSolver& K_inv, double lambda) {
  check_shapes(Z, K_inv.size());
  if (lambda < 0.0) throw InputError("spectral: lambda must be non-negative");
  const Index n = Z.cols() / 3;
  MatrixXd G = MatrixXd::Zero(Z.rows(), Z.cols());
  if (lambda != 0.0) G = 2.0 * lambda * K_inv.solve(MatrixXd(Z.transpose())).transpose();
  for (Index i = 0; i < n; ++i) {
    const double neg = Z.col(i).dot(Z.col(i + 2 * n));
    G.col(i) += -2.0 * Z.col(i + n) + 2.0 * neg * Z.col(i + 2 * n);
    G.col(i + n) += -2.0 * Z.col(i);
    G.col(i + 2 * n) += 2.0 * neg * Z.col(i);
  }
  return G;
}

MatrixXd spectral_grad(const MatrixXd& Z, const MatrixXd& K, double lambda, double jitter_scale) {
  return spectral_grad(Z, ShiftedSolver::jittered(K, jitter_scale), lambda);
}

MatrixXd stack_triplets(const TripletSet& triplets) {
  triplets.validate();
  const Index n = triplets.size();
  MatrixXd out(triplets.dim(), 3 * n);
  out << triplets.anchors, triplets.positives, triplets.negatives;
  return out;
}

void refresh_spectral(SpectralModel& model) {
  const MatrixXd K = gram(model.spec, model.points);
  model.K_inv = std::make_shared<const ShiftedSolver>(ShiftedSolver::jittered(K, model.jitter_scale));
  check_shapes(model.Z, model.K_inv->size());
  model.coeffs = model.K_inv->solve(MatrixXd(model.Z.transpose()));
}

SpectralModel fit_spectral(const TripletSet& triplets, const KernelSpec& spec, int h, double lambda,
                           const OptimOptions& opt, std::uint64_t seed, double jitter_scale) {
  if (!(lambda > 0.0)) throw InputError("fit_spectral: lambda must be positive");
  if (!(opt.step > 0.0)) throw InputError("fit_spectral: step must be positive");
  if (h < 1) throw InputError("fit_spectral: h must be >= 1");

  SpectralModel model;
  model.spec = spec;
  model.lambda = lambda;
  model.jitter_scale = jitter_scale;
  model.points = stack_triplets(triplets);
  const MatrixXd K = gram(spec, model.points);
  model.K_inv = std::make_shared<const ShiftedSolver>(ShiftedSolver::jittered(K, jitter_scale));
  const ShiftedSolver& K_inv = *model.K_inv;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  MatrixXd Z(h, model.points.cols());
  for (Index j = 0; j < Z.cols(); ++j) {
    for (Index i = 0; i < h; ++i) Z(i, j) = normal(rng);
  }

  double loss = spectral_loss(Z, K_inv, lambda);
  model.trace.losses.push_back(loss);
  int increases = 0;
  for (int it = 0; it < opt.max_iters; ++it) {
    const MatrixXd G = spectral_grad(Z, K_inv, lambda);
    const double gnorm = G.norm();
    if (gnorm <= opt.tol * (1.0 + Z.norm())) {
      model.trace.converged = true;
      break;
    }
    double t = opt.step;
    MatrixXd candidate = Z - t * G;
    double cand_loss = spectral_loss(candidate, K_inv, lambda);
    if (opt.backtracking) {
      int tries = 0;
      while (!(cand_loss <= loss - opt.armijo * t * gnorm * gnorm) && tries < opt.max_backtracks) {
        t *= opt.shrink;
        candidate = Z - t * G;
        cand_loss = spectral_loss(candidate, K_inv, lambda);
        ++tries;
      }
      if (!(cand_loss <= loss)) {
        // no decrease at the smallest trial step: stationary to working precision
        model.trace.converged = true;
        break;
      }
    } else {
      increases = cand_loss > loss ? increases + 1 : 0;
      if (increases >= 10 || !std::isfinite(cand_loss)) {
        throw OptimizationError("fit_spectral: loss diverged; use a smaller step");
      }
    }
    Z = std::move(candidate);
    loss = cand_loss;
    model.trace.losses.push_back(loss);
    model.trace.iterations = it + 1;
  }

  model.Z = std::move(Z);
  model.coeffs = K_inv.solve(MatrixXd(model.Z.transpose()));
  return model;
}

VectorXd SpectralModel::embed(const VectorXd& x) const {
  if (x.size() != points.rows()) throw InputError("embed: query dimension does not match training data");
  return coeffs.transpose() * kernel_column(spec, points, x);
}

MatrixXd SpectralModel::embed_batch(const MatrixXd& X) const {
  if (X.rows() != points.rows()) throw InputError("embed: query dimension does not match training data");
  return coeffs.transpose() * gram(spec, points, X);
}

double SpectralModel::norm_sq() const { return spectral_norm_sq(Z, *K_inv); }

}  // namespace kernelrep
