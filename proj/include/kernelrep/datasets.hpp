#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace kernelrep {

using Eigen::Index;
using Eigen::MatrixXd;

/// Samples are the columns of X (d x n). `y` is empty for unlabeled data.
struct Dataset {
  MatrixXd X;
  std::vector<int> y;
  std::string name;

  Index dim() const { return X.rows(); }
  Index size() const { return X.cols(); }
  bool labeled() const { return !y.empty(); }
  int num_classes() const;
  /// Throws InputError on NaN/Inf entries or malformed labels.
  void validate() const;
};

Dataset make_circles(Index n, double factor, double noise_sd, std::uint64_t seed);
Dataset make_moons(Index n, double noise_sd, std::uint64_t seed);

struct BlobsParams {
  int classes = 3;
  Index dim = 2;
  double cluster_sd = 1.0;
  double center_box = 10.0;  // centers uniform in [-center_box, center_box]^dim
};
Dataset make_blobs(Index n, const BlobsParams& params, std::uint64_t seed);

struct CubesParams {
  int classes = 4;
  Index dim = 13;
  double spread = 0.3;
};
Dataset make_cubes(Index n, const CubesParams& params, std::uint64_t seed);

/// Builds one of the generated datasets by name ("circles", "moons", "blobs",
/// "cubes") with its default parameters.
Dataset make_named(const std::string& name, Index n, std::uint64_t seed);

struct CsvOptions {
  bool has_header = true;
  /// Column holding the class label, by header name or zero-based index.
  /// Unset: every column is a feature and the dataset is unlabeled.
  std::optional<std::variant<std::string, std::size_t>> label_column;
};

/// Reads a comma-separated file. Features are standardised per column (zero
/// mean, unit variance; constant columns become zero). Labels are mapped to
/// 0..C-1 in order of first appearance.
Dataset load_csv(const std::string& path, const CsvOptions& options);

/// Writes features as x0..x{d-1} plus a trailing `label` column when labeled.
void write_csv(const Dataset& data, const std::string& path);

struct SplitFractions {
  double unlabeled = 0.50;
  double labeled = 0.05;
  double test = 0.45;
};

struct SplitIndices {
  std::vector<Index> unlabeled;
  std::vector<Index> labeled;
  std::vector<Index> test;
  std::uint64_t seed = 0;
};

/// Seeded partition of [n]; the labeled part is stratified so that every
/// class receives at least one sample.
SplitIndices split(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed);

/// Columns of X selected by `idx`, in order.
MatrixXd select_columns(const MatrixXd& X, const std::vector<Index>& idx);
std::vector<int> select_labels(const std::vector<int>& y, const std::vector<Index>& idx);

/// Anchors, positives and negatives, column-aligned (d x m each).
struct TripletSet {
  MatrixXd anchors;
  MatrixXd positives;
  MatrixXd negatives;
  /// Column of the training matrix each negative was drawn from.
  std::vector<Index> negative_source;

  Index size() const { return anchors.cols(); }
  Index dim() const { return anchors.rows(); }
  void validate() const;
};

/// Positive i = anchor i + N(0, (aug_sd * sd_f)^2) per feature f, where sd_f is
/// the feature's standard deviation over X_train. Negative i is a uniformly
/// drawn training column j != i.
TripletSet make_triplets(const MatrixXd& X_train, double aug_sd, std::uint64_t seed);

/// X + i.i.d. N(0, noise_sd^2) entries.
MatrixXd corrupt(const MatrixXd& X, double noise_sd, std::uint64_t seed);

/// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace kernelrep
