// One PASS/FAIL line per acceptance criterion. Optional argv[1] selects
// criteria whose name contains it.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kernelrep/datasets.hpp"
#include "kernelrep/diagnostics.hpp"
#include "kernelrep/downstream.hpp"
#include "kernelrep/harness.hpp"
#include "kernelrep/kernel_ae.hpp"
#include "kernelrep/kpca.hpp"
#include "kernelrep/linalg.hpp"
#include "kernelrep/simple_contrastive.hpp"
#include "kernelrep/spectral_contrastive.hpp"

using namespace kernelrep;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

MatrixXd gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixXd M(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) M(i, j) = dist(rng);
  }
  return M;
}

MatrixXd unit_columns(Index rows, Index cols, std::uint64_t seed) {
  MatrixXd M = gaussian_matrix(rows, cols, seed);
  for (Index j = 0; j < cols; ++j) M.col(j).normalize();
  return M;
}

MatrixXd central_difference(const std::function<double(const MatrixXd&)>& f, const MatrixXd& Z, double eps) {
  MatrixXd G(Z.rows(), Z.cols());
  for (Index j = 0; j < Z.cols(); ++j) {
    for (Index i = 0; i < Z.rows(); ++i) {
      MatrixXd hi = Z, lo = Z;
      hi(i, j) += eps;
      lo(i, j) -= eps;
      G(i, j) = (f(hi) - f(lo)) / (2.0 * eps);
    }
  }
  return G;
}

double relative_error(const MatrixXd& A, const MatrixXd& B) {
  const double scale = std::max(A.norm(), B.norm());
  return scale == 0.0 ? 0.0 : (A - B).norm() / scale;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Results CSV with the fit_ms column blanked.
std::string strip_timing(const std::string& csv) {
  const std::vector<std::string> header = split_fields(kResultsHeader);
  std::size_t col = 0;
  while (header[col] != "fit_ms") ++col;
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> cells = split_fields(line);
    if (col < cells.size()) cells[col].clear();
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += '\n';
  }
  return out;
}

Outcome embedding_beats_raw() {
  ExperimentConfig c = parse_config(R"({"dataset": {"name": "circles", "n": 200, "factor": 0.6}})");
  const ExperimentResult r = run_experiment(c, {true, nullptr});
  double raw = std::numeric_limits<double>::quiet_NaN();
  const AggregateRow* best = nullptr;
  for (const AggregateRow& row : r.aggregates) {
    if (row.metric_name != "accuracy") continue;
    if (row.method == "raw") {
      raw = row.mean;
    } else if (!best || row.mean > best->mean) {
      best = &row;
    }
  }
  if (!best || std::isnan(raw)) return {false, "missing aggregate rows"};
  return {best->mean > raw, "raw " + fmt("%.4f", raw) + ", best " + best->method + "/" + best->kernel + " " +
                                fmt("%.4f", best->mean)};
}

Outcome orthonormality() {
  const KernelSpec specs[] = {KernelSpec::gaussian(0.5), KernelSpec::laplacian(0.5), KernelSpec::linear(),
                              KernelSpec::relu_ntk(2)};
  double worst = 0.0;
  int fits = 0;
  for (const KernelSpec& s : specs) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Index n = 10 + 10 * static_cast<Index>(seed);  // up to 50
      const int h = s.family == KernelFamily::linear ? 2 : 3;
      const TripletSet t = make_triplets(gaussian_matrix(4, n, seed), 0.2, seed + 100);
      const SimpleContrastiveModel m = fit_simple(t, s, h);
      const ContrastiveSystem sys = assemble_contrastive_system(t, s);
      const double err = (m.A.transpose() * sys.K1 * m.A - MatrixXd::Identity(h, h)).cwiseAbs().maxCoeff();
      worst = std::max(worst, err);
      ++fits;
    }
  }
  return {worst <= 1e-6, std::to_string(fits) + " fits, max deviation " + fmt("%.3g", worst)};
}

Outcome linear_oracle() {
  double worst = 0.0;
  int cases = 0;
  bool beaten = false;
  std::mt19937_64 rng(7);
  for (Index d = 1; d <= 3; ++d) {
    for (Index n = 2; n <= 10; n += 2) {
      for (int h = 1; h <= std::min<Index>(2, d); ++h) {
        const std::uint64_t seed = 1000 * static_cast<std::uint64_t>(d) + 10 * static_cast<std::uint64_t>(n) + h;
        const TripletSet t = make_triplets(gaussian_matrix(d, n, seed), 0.3, seed + 1);
        const SimpleContrastiveModel m = fit_simple(t, KernelSpec::linear(), h);
        // explicit features: phi = identity, loss(W) = Tr(W^T S W) over W^T W = I
        const MatrixXd Delta = t.negatives - t.positives;
        const MatrixXd S = 0.5 * (t.anchors * Delta.transpose() + Delta * t.anchors.transpose());
        const VectorXd ev = sym_eig(S).values;
        const double oracle = ev.tail(h).sum();
        worst = std::max(worst, std::abs(m.objective - oracle) / std::max(1.0, std::abs(oracle)));
        // brute force: no random orthonormal W does better than the oracle
        for (int trial = 0; trial < 200; ++trial) {
          Eigen::HouseholderQR<MatrixXd> qr(gaussian_matrix(d, h, rng()));
          const MatrixXd W = qr.householderQ() * MatrixXd::Identity(d, h);
          if ((W.transpose() * S * W).trace() < oracle - 1e-9) beaten = true;
        }
        ++cases;
      }
    }
  }
  return {worst <= 1e-6 && !beaten,
          std::to_string(cases) + " instances, max error " + fmt("%.3g", worst) + (beaten ? ", oracle beaten" : "")};
}

Outcome gradient_checks() {
  double spectral_worst = 0.0, ae_worst = 0.0;
  int spectral_n = 0, ae_n = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index m = 3 * (1 + static_cast<Index>(seed % 4));
    const Index h = 1 + static_cast<Index>(seed % 3);
    const MatrixXd P = gaussian_matrix(2, m, 300 + seed);
    const MatrixXd K = gram(KernelSpec::gaussian(0.7), P);
    const ShiftedSolver K_inv = ShiftedSolver::jittered(K, 1e-3);
    const double lambda = 0.2 + 0.3 * static_cast<double>(seed % 3);
    const MatrixXd Z = gaussian_matrix(h, m, 400 + seed);
    const MatrixXd F = central_difference([&](const MatrixXd& W) { return spectral_loss(W, K_inv, lambda); }, Z, 1e-5);
    spectral_worst = std::max(spectral_worst, relative_error(spectral_grad(Z, K_inv, lambda), F));
    ++spectral_n;
  }
  const KernelSpec decoders[] = {KernelSpec::gaussian(0.8), KernelSpec::linear()};
  for (const KernelSpec& dec : decoders) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Index n = 3 + static_cast<Index>(seed % 8);
      const Index h = 1 + static_cast<Index>(seed % 3);
      AeProblem p;
      p.X_train = gaussian_matrix(3, n, 500 + seed);
      p.X_enc = p.X_train;
      p.spec_enc = KernelSpec::gaussian(0.5);
      p.spec_dec = dec;
      p.lambda = 0.1 + 0.1 * static_cast<double>(seed % 4);
      p.jitter_scale = 1e-3;
      const AeObjective obj(p);
      const MatrixXd Z = unit_columns(h, n, 600 + seed);
      const MatrixXd F = central_difference([&](const MatrixXd& W) { return obj.value(W); }, Z, 1e-5);
      ae_worst = std::max(ae_worst, relative_error(obj.grad(Z), F));
      ++ae_n;
    }
  }
  return {spectral_worst <= 1e-5 && ae_worst <= 1e-4 && spectral_n >= 20 && ae_n >= 20,
          "spectral " + std::to_string(spectral_n) + " max " + fmt("%.3g", spectral_worst) + ", ae " +
              std::to_string(ae_n) + " max " + fmt("%.3g", ae_worst)};
}

Outcome inference_identities() {
  // spectral: distinct training points keep K nonsingular
  const TripletSet t = make_triplets(gaussian_matrix(3, 5, 21), 0.3, 22);
  OptimOptions none;
  none.max_iters = 0;
  SpectralModel sm = fit_spectral(t, KernelSpec::gaussian(0.5), 2, 1.0, none, 23, 1e-12);
  sm.points = gaussian_matrix(3, 15, 24);
  sm.Z = gaussian_matrix(2, 15, 25);
  refresh_spectral(sm);
  double spectral_err = 0.0;
  for (Index j = 0; j < sm.points.cols(); ++j) {
    spectral_err = std::max(spectral_err, (sm.embed(sm.points.col(j)) - sm.Z.col(j)).norm());
  }

  const MatrixXd X = gaussian_matrix(3, 15, 26);
  OptimOptions o;
  o.max_iters = 20;
  AeFitOptions fo;
  fo.jitter_scale = 1e-12;
  const KernelAEModel am = fit_ae(X, KernelSpec::gaussian(0.5), KernelSpec::gaussian(1.0), 2, 0.1, o, 27, fo);
  const MatrixXd Q = am.reconstruction();
  double embed_err = 0.0, recon_err = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    embed_err = std::max(embed_err, (am.embed(am.X_enc.col(j)) - am.Z.col(j)).norm());
    recon_err = std::max(recon_err, (am.reconstruct(am.X_enc.col(j)) - Q.col(j)).norm());
  }
  return {spectral_err <= 1e-6 && embed_err <= 1e-6 && recon_err <= 1e-6,
          "spectral " + fmt("%.3g", spectral_err) + ", ae embed " + fmt("%.3g", embed_err) + ", ae reconstruct " +
              fmt("%.3g", recon_err)};
}

Outcome perfect_reconstruction() {
  const MatrixXd X = gaussian_matrix(5, 50, 31);
  const MatrixXd Z = unit_columns(3, 50, 32);
  const MatrixXd Q = ae_reconstruction(Z, X, KernelSpec::gaussian(1.0), 1e-10);
  const double rel = (Q - X).norm() / X.norm();
  return {rel <= 1e-3, "relative error " + fmt("%.3g", rel)};
}

Outcome denoising() {
  // Same data pipeline as the harness: training = unlabeled + labeled, test noise from stream 4.
  const ExperimentConfig defaults;
  const std::vector<double> grid = log_grid(defaults.grid_min, defaults.grid_max, defaults.grid_count);
  const Dataset data = make_circles(200, 0.6, 0.05, 0);
  struct Seeded {
    MatrixXd X, X_test, noisy;
    std::uint64_t seed;
  };
  std::vector<Seeded> runs;
  double identity = 0.0;
  for (std::uint64_t s : defaults.seeds) {
    const SplitIndices idx = split(data, defaults.split, derive_seed(s, 1));
    std::vector<Index> train = idx.unlabeled;
    train.insert(train.end(), idx.labeled.begin(), idx.labeled.end());
    Seeded r{select_columns(data.X, train), select_columns(data.X, idx.test), MatrixXd(), s};
    r.noisy = corrupt(r.X_test, defaults.noise_sd, derive_seed(s, 4));
    identity += (r.noisy - r.X_test).squaredNorm() / static_cast<double>(r.X_test.cols());
    runs.push_back(std::move(r));
  }
  identity /= static_cast<double>(runs.size());
  OptimOptions o = defaults.ae_opt;
  o.max_iters = 200;
  AeFitOptions fo;
  fo.denoising = true;
  fo.noise_sd = defaults.noise_sd;
  fo.jitter_scale = defaults.ae_jitter;
  double best = std::numeric_limits<double>::infinity();
  double best_gamma = 0.0;
  for (double g : grid) {
    double mse = 0.0;
    for (const Seeded& r : runs) {
      const KernelAEModel m = fit_ae(r.X, KernelSpec::gaussian(g), KernelSpec::gaussian(2.0), 3, 0.1, o,
                                     derive_seed(r.seed, 3), fo);
      mse += (m.reconstruct_batch(r.noisy) - r.X_test).squaredNorm() / static_cast<double>(r.X_test.cols());
    }
    mse /= static_cast<double>(runs.size());
    if (mse < best) {
      best = mse;
      best_gamma = g;
    }
  }
  return {best < identity, "identity " + fmt("%.5f", identity) + ", best " + fmt("%.5f", best) +
                               " at encoder gamma " + fmt("%.4g", best_gamma)};
}

Outcome kpca_equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    MatrixXd X = gaussian_matrix(4, 20, 700 + seed);
    X.row(0) *= 3.0;
    X.row(1) *= 2.0;
    const int h = 3;
    const KPCAModel m = fit_kpca(X, KernelSpec::linear(), h);
    const MatrixXd Xc = X.colwise() - X.rowwise().mean();
    const MatrixXd classical = sym_eig(Xc * Xc.transpose()).vectors.leftCols(h).transpose() * Xc;
    MatrixXd aligned = m.train_embedding;
    for (Index r = 0; r < h; ++r) {
      if (aligned.row(r).dot(classical.row(r)) < 0.0) aligned.row(r) *= -1.0;
    }
    worst = std::max(worst, (aligned - classical).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-6, "max deviation " + fmt("%.3g", worst)};
}

Outcome diagnostics_closed_forms() {
  bool exact = true;
  double norm_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Index n = 8 + 4 * static_cast<Index>(seed);
    const TripletSet t = make_triplets(gaussian_matrix(3, n, 800 + seed), 0.2, 900 + seed);
    for (int h : {1, 2, 3}) {
      const ComplexityTerms c = complexity_terms(t, KernelSpec::gaussian(0.4), h);
      exact = exact && c.kappa == 1.0 && c.alpha == 3.0 * std::sqrt(static_cast<double>(h) * static_cast<double>(n));
      const SimpleContrastiveModel m = fit_simple(t, KernelSpec::gaussian(0.4), h);
      norm_worst = std::max(norm_worst, std::abs(model_norm(m) - h));
    }
  }
  return {exact && norm_worst <= 1e-4,
          std::string(exact ? "kappa/alpha exact" : "kappa/alpha mismatch") + ", norm deviation " +
              fmt("%.3g", norm_worst)};
}

Outcome determinism() {
  const ExperimentConfig c = parse_config(R"({
    "dataset": {"name": "circles", "n": 100},
    "methods": ["raw", "kpca", "simple", "spectral", "ae", "ae_denoise"],
    "seeds": [11, 23],
    "grid": {"min": 0.1, "max": 10, "count": 3},
    "optimizer": {"spectral": {"max_iters": 50}, "ae": {"max_iters": 30}}
  })");
  const ExperimentResult a = run_experiment(c, {true, nullptr});
  const ExperimentResult b = run_experiment(c, {true, nullptr});
  const bool same_results = strip_timing(format_results_csv(a.records)) == strip_timing(format_results_csv(b.records));
  const bool same_aggregate = format_aggregate_csv(a.aggregates) == format_aggregate_csv(b.aggregates);
  return {same_results && same_aggregate,
          std::to_string(a.records.size()) + " rows, results " + (same_results ? "identical" : "differ") +
              ", aggregate " + (same_aggregate ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
      {"embedding_beats_raw", embedding_beats_raw},
      {"orthonormality", orthonormality},
      {"linear_oracle", linear_oracle},
      {"gradient_checks", gradient_checks},
      {"inference_identities", inference_identities},
      {"perfect_reconstruction", perfect_reconstruction},
      {"denoising", denoising},
      {"kpca_equivalence", kpca_equivalence},
      {"diagnostics_closed_forms", diagnostics_closed_forms},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (name.find(filter) == std::string::npos) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", name.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
