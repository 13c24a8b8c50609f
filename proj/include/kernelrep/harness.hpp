#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kernelrep/datasets.hpp"
#include "kernelrep/kernels.hpp"
#include "kernelrep/optim.hpp"

namespace kernelrep {

enum class Method { raw, kpca, simple, spectral, ae, ae_denoise };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct DatasetConfig {
  /// Generator name (circles, moons, blobs, cubes); ignored when csv is set.
  std::string name = "circles";
  Index n = 200;
  std::uint64_t seed = 0;
  /// Generator noise; unset keeps the generator default.
  std::optional<double> noise;
  double factor = 0.6;
  std::string csv;
  std::optional<std::variant<std::string, std::size_t>> label_column;
  bool has_header = true;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  std::vector<Method> methods{Method::raw, Method::kpca, Method::simple, Method::spectral, Method::ae};
  std::vector<KernelSpec> kernels{KernelSpec::gaussian(1.0), KernelSpec::laplacian(1.0), KernelSpec::linear()};
  int h = 2;
  int k = 3;
  double lambda_spectral = 1.0;
  double lambda_ae = 0.1;
  /// Decoder kernel of the autoencoders; unset reuses the encoder kernel.
  std::optional<KernelSpec> ae_decoder = KernelSpec::gaussian(1.0);
  SplitFractions split;
  std::vector<std::uint64_t> seeds{11, 23, 37, 41, 53};
  double grid_min = 0.01;
  double grid_max = 100.0;
  int grid_count = 15;
  OptimOptions spectral_opt{1.0, 300, 1e-6, true, 1e-4, 0.5, 40};
  OptimOptions ae_opt{1e-2, 100, 1e-6, true, 1e-4, 0.5, 40};
  double aug_sd = 0.1;
  double noise_sd = 0.1;
  double jitter = 1e-10;
  /// Jitter of the spectral model's K^{-1}; larger values keep gradient
  /// descent well conditioned.
  double spectral_jitter = 1e-3;
  /// Jitter of the autoencoder's encoder Gram; acts as a ridge on the encoder
  /// so noisy inputs are not interpolated.
  double ae_jitter = 1e-3;
  std::string output_dir = "results";

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Parses the JSON config format documented in the README.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// One (dataset, method, kernel, seed, metric) row. Optional fields are
/// written as empty cells.
struct ResultRecord {
  std::string dataset;
  std::string method;
  std::string kernel;
  std::optional<double> bandwidth;
  std::uint64_t seed = 0;
  std::string metric_name;
  double metric_value = 0.0;
  double fit_ms = 0.0;
  std::optional<double> alpha;
  std::optional<double> kappa;
  std::optional<double> gamma;
  std::optional<double> w_norm_sq;

  bool failed() const { return metric_name.rfind("error:", 0) == 0; }
};

struct AggregateRow {
  std::string dataset;
  std::string method;
  std::string kernel;
  std::string metric_name;
  double mean = 0.0;
  double sd = 0.0;
  int n_seeds = 0;
};

struct ExperimentResult {
  std::vector<ResultRecord> records;
  std::vector<AggregateRow> aggregates;
};

struct RunOptions {
  bool quiet = false;
  std::ostream* log = nullptr;  // defaults to std::cerr
};

inline constexpr const char* kResultsHeader =
    "dataset,method,kernel,bandwidth,seed,metric_name,metric_value,fit_ms,alpha,kappa,gamma,w_norm_sq";
inline constexpr const char* kAggregateHeader = "dataset,method,kernel,metric_name,mean,sd,n_seeds";

/// Loads or generates the configured dataset.
Dataset load_dataset(const DatasetConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Mean and sample standard deviation per (method, kernel, metric), failed rows excluded.
std::vector<AggregateRow> aggregate(const std::vector<ResultRecord>& records);

std::string format_results_csv(const std::vector<ResultRecord>& records);
std::string format_aggregate_csv(const std::vector<AggregateRow>& rows);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace kernelrep
