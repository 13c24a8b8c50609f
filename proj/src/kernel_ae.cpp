#include "kernelrep/kernel_ae.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "kernelrep/datasets.hpp"
#include "kernelrep/error.hpp"
#include "kernelrep/kpca.hpp"

namespace kernelrep {

namespace {

void check_decoder(const KernelSpec& spec) {
  if (spec.family == KernelFamily::relu_ntk) {
    throw UnsupportedError("kernel AE: relu_ntk is not supported as decoder kernel");
  }
}

/// Random unit columns drawn from an isotropic Gaussian.
MatrixXd random_unit_columns(Index h, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd Z(h, n);
  for (Index j = 0; j < n; ++j) {
    do {
      for (Index i = 0; i < h; ++i) Z(i, j) = normal(rng);
    } while (Z.col(j).norm() < 1e-8);
    Z.col(j).normalize();
  }
  return Z;
}

MatrixXd tangent(const MatrixXd& Z, const MatrixXd& G) {
  const VectorXd radial = (Z.array() * G.array()).colwise().sum().transpose();
  return G - Z * radial.asDiagonal();
}

}  // namespace

MatrixXd normalize_columns(const MatrixXd& Z) {
  MatrixXd out = Z;
  for (Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm > 0.0) out.col(j) /= norm;
  }
  return out;
}

MatrixXd ae_reconstruction(const MatrixXd& Z, const MatrixXd& X_train, const KernelSpec& spec_dec,
                           double lambda) {
  if (Z.cols() != X_train.cols()) throw InputError("ae_reconstruction: Z and X must have n columns");
  if (!(lambda > 0.0)) throw InputError("ae_reconstruction: lambda must be positive");
  const MatrixXd K_Z = gram(spec_dec, Z);
  return X_train * ridge_solve(K_Z, lambda, K_Z);
}

AeObjective::AeObjective(AeProblem problem) : problem_(std::move(problem)) {
  if (problem_.X_train.cols() != problem_.X_enc.cols() || problem_.X_train.rows() != problem_.X_enc.rows()) {
    throw InputError("kernel AE: X_train and X_enc must have the same shape");
  }
  if (!(problem_.lambda > 0.0)) throw InputError("kernel AE: lambda must be positive");
  check_decoder(problem_.spec_dec);
  const MatrixXd K_X = gram(problem_.spec_enc, problem_.X_enc);
  enc_ = std::make_shared<const ShiftedSolver>(ShiftedSolver::jittered(K_X, problem_.jitter_scale));
}

void AeObjective::check(const MatrixXd& Z) const {
  if (Z.cols() != problem_.X_train.cols()) throw InputError("kernel AE: Z must have n columns");
  if (Z.rows() < 1) throw InputError("kernel AE: Z must have at least one row");
}

AeTerms AeObjective::terms(const MatrixXd& Z) const {
  check(Z);
  const double lambda = problem_.lambda;
  const MatrixXd K_Z = gram(problem_.spec_dec, Z);
  const ShiftedSolver ridge(K_Z, lambda);
  const MatrixXd P = ridge.solve(MatrixXd(problem_.X_train.transpose()));  // R X^T, n x d

  AeTerms t;
  // Q - X = -lambda X R
  t.reconstruction = lambda * lambda * P.squaredNorm();
  t.decoder_norm = (P.array() * (K_Z * P).array()).sum();
  const MatrixXd Y = enc_->solve(MatrixXd(Z.transpose()));
  t.encoder_norm = (Z.transpose().array() * Y.array()).sum();
  t.total = t.reconstruction + lambda * (t.encoder_norm + t.decoder_norm);
  return t;
}

MatrixXd AeObjective::grad(const MatrixXd& Z) const {
  check(Z);
  const double lambda = problem_.lambda;
  const KernelSpec& dec = problem_.spec_dec;
  const MatrixXd K_Z = gram(dec, Z);
  const ShiftedSolver ridge(K_Z, lambda);
  const MatrixXd P = ridge.solve(MatrixXd(problem_.X_train.transpose()));
  // reconstruction + lambda * decoder_norm = lambda Tr(X R X^T); its derivative in K_Z
  const MatrixXd G_K = -lambda * P * P.transpose();

  MatrixXd grad = 2.0 * lambda * enc_->solve(MatrixXd(Z.transpose())).transpose();
  const Index n = Z.cols();
  switch (dec.family) {
    case KernelFamily::gaussian: {
      const MatrixXd H = G_K.cwiseProduct(K_Z);
      const VectorXd row_sums = H.rowwise().sum();
      grad += -4.0 * dec.gamma * (Z * row_sums.asDiagonal() - Z * H);
      break;
    }
    case KernelFamily::linear:
      grad += 2.0 * Z * G_K;
      break;
    case KernelFamily::laplacian:
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
          if (i == j) continue;
          const double w = -2.0 * dec.gamma * G_K(i, j) * K_Z(i, j);
          for (Index r = 0; r < Z.rows(); ++r) {
            const double diff = Z(r, i) - Z(r, j);
            const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            grad(r, i) += w * sign;
          }
        }
      }
      break;
    case KernelFamily::relu_ntk:
      check_decoder(dec);
      break;
  }
  return grad;
}

double ae_objective(const MatrixXd& Z, const AeProblem& problem) { return AeObjective(problem).value(Z); }

MatrixXd ae_grad(const MatrixXd& Z, const AeProblem& problem) { return AeObjective(problem).grad(Z); }

void refresh_ae(KernelAEModel& model) {
  check_decoder(model.spec_dec);
  const MatrixXd K_X = gram(model.spec_enc, model.X_enc);
  model.K_inv = std::make_shared<const ShiftedSolver>(ShiftedSolver::jittered(K_X, model.jitter_scale));
  model.enc_coeffs = model.K_inv->solve(MatrixXd(model.Z.transpose()));
  const MatrixXd K_Z = gram(model.spec_dec, model.Z);
  const ShiftedSolver ridge(K_Z, model.lambda);
  model.dec_coeffs = ridge.solve(MatrixXd(model.X_train.transpose())).transpose();
}

KernelAEModel fit_ae(const MatrixXd& X, const KernelSpec& spec_enc, const KernelSpec& spec_dec, int h,
                     double lambda, const OptimOptions& opt, std::uint64_t seed,
                     const AeFitOptions& options) {
  if (h < 1) throw InputError("fit_ae: h must be >= 1");
  if (!(lambda > 0.0)) throw InputError("fit_ae: lambda must be positive");
  if (!(opt.step > 0.0)) throw InputError("fit_ae: step must be positive");
  check_decoder(spec_dec);
  const Index n = X.cols();
  if (n < 1) throw InputError("fit_ae: no training samples");

  AeProblem problem;
  problem.X_train = X;
  if (options.denoising) {
    problem.X_enc = options.corrupted ? *options.corrupted : corrupt(X, options.noise_sd, derive_seed(seed, 0xae));
  } else {
    problem.X_enc = X;
  }
  problem.spec_enc = spec_enc;
  problem.spec_dec = spec_dec;
  problem.lambda = lambda;
  problem.jitter_scale = options.jitter_scale;
  const AeObjective objective(problem);

  KernelAEModel model;
  MatrixXd Z;
  try {
    Z = fit_kpca(problem.X_enc, spec_enc, h).train_embedding;
    for (Index j = 0; j < n; ++j) {
      if (Z.col(j).norm() < 1e-12) throw RankError("zero kernel PCA score");
    }
    Z = normalize_columns(Z);
  } catch (const Error&) {
    Z = random_unit_columns(h, n, seed);
    model.random_init = true;
  }

  double f = objective.value(Z);
  MatrixXd best = Z;
  double best_f = f;
  model.trace.losses.push_back(f);
  int increases = 0;
  for (int it = 0; it < opt.max_iters; ++it) {
    const MatrixXd G = tangent(Z, objective.grad(Z));
    const double gnorm = G.norm();
    if (gnorm <= opt.tol * (1.0 + Z.norm())) {
      model.trace.converged = true;
      break;
    }
    double t = opt.step;
    MatrixXd candidate = normalize_columns(Z - t * G);
    double cand_f = objective.value(candidate);
    if (opt.backtracking) {
      int tries = 0;
      while (!(cand_f <= f - opt.armijo * (candidate - Z).squaredNorm() / t) && tries < opt.max_backtracks) {
        t *= opt.shrink;
        candidate = normalize_columns(Z - t * G);
        cand_f = objective.value(candidate);
        ++tries;
      }
      if (!(cand_f <= f)) {
        model.trace.converged = true;
        break;
      }
    } else {
      increases = cand_f > f ? increases + 1 : 0;
      if (increases >= 10 || !std::isfinite(cand_f)) {
        throw OptimizationError("fit_ae: objective diverged; use a smaller step");
      }
    }
    Z = std::move(candidate);
    f = cand_f;
    model.trace.losses.push_back(f);
    model.trace.iterations = it + 1;
    if (f < best_f) {
      best_f = f;
      best = Z;
    }
  }

  model.Z = std::move(best);
  model.X_train = problem.X_train;
  model.X_enc = problem.X_enc;
  model.spec_enc = spec_enc;
  model.spec_dec = spec_dec;
  model.lambda = lambda;
  model.jitter_scale = options.jitter_scale;
  model.denoising = options.denoising;
  model.K_inv = objective.shared_encoder_solver();
  model.enc_coeffs = model.K_inv->solve(MatrixXd(model.Z.transpose()));
  const MatrixXd K_Z = gram(spec_dec, model.Z);
  const ShiftedSolver ridge(K_Z, lambda);
  model.dec_coeffs = ridge.solve(MatrixXd(model.X_train.transpose())).transpose();
  return model;
}

VectorXd KernelAEModel::embed(const VectorXd& x) const {
  if (x.size() != X_enc.rows()) throw InputError("embed: query dimension does not match training data");
  return enc_coeffs.transpose() * kernel_column(spec_enc, X_enc, x);
}

MatrixXd KernelAEModel::embed_batch(const MatrixXd& X) const {
  if (X.rows() != X_enc.rows()) throw InputError("embed: query dimension does not match training data");
  return enc_coeffs.transpose() * gram(spec_enc, X_enc, X);
}

VectorXd KernelAEModel::reconstruct(const VectorXd& x) const {
  const VectorXd z = embed(x);
  return dec_coeffs * kernel_column(spec_dec, Z, z);
}

MatrixXd KernelAEModel::reconstruct_batch(const MatrixXd& X) const {
  const MatrixXd Zs = embed_batch(X);
  return dec_coeffs * gram(spec_dec, Z, Zs);
}

MatrixXd KernelAEModel::reconstruction() const { return ae_reconstruction(Z, X_train, spec_dec, lambda); }

AeTerms KernelAEModel::terms() const {
  AeProblem p{X_train, X_enc, spec_enc, spec_dec, lambda, jitter_scale};
  return AeObjective(std::move(p)).terms(Z);
}

}  // namespace kernelrep
