#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace kernelrep {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Majority-vote k-NN over stored columns. Distance ties go to the lower
/// stored index; vote ties go to the tied label whose nearest member is closest.
class KnnClassifier {
 public:
  KnnClassifier() = default;
  KnnClassifier(MatrixXd points, std::vector<int> labels, int k = 3);

  int predict(const VectorXd& query) const;
  std::vector<int> predict_batch(const MatrixXd& queries) const;

  int k() const { return k_; }
  Index size() const { return points_.cols(); }
  bool empty() const { return points_.cols() == 0; }

 private:
  MatrixXd points_;
  std::vector<int> labels_;
  int k_ = 3;
};

/// Fraction of predictions equal to the truth.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);
double accuracy(const KnnClassifier& clf, const MatrixXd& queries, const std::vector<int>& truth);

/// Leave-one-out k-NN accuracy over the columns of `points`. Each fold uses
/// min(k, m - 1) neighbours.
double loo_accuracy(const MatrixXd& points, const std::vector<int>& labels, int k);

/// `count` values log-spaced on [lo, hi], endpoints included.
std::vector<double> log_grid(double lo, double hi, int count);

struct BandwidthSelection {
  /// Unset for bandwidth-free kernels (reported as "n/a").
  std::optional<double> chosen;
  std::optional<std::size_t> chosen_index;
  /// LOO accuracy per grid value, -1 where the fit failed.
  std::vector<double> scores;
};

/// Embeds the labeled set for one bandwidth value; may throw.
using LabeledEmbedder = std::function<MatrixXd(double gamma)>;

/// Picks the grid value with the highest leave-one-out k-NN accuracy on the
/// labeled embeddings (ties go to the smaller value). A failing fit scores -1;
/// SelectionError when every value fails.
BandwidthSelection loo_select_bandwidth(const LabeledEmbedder& embed_labeled,
                                        const std::vector<int>& labels,
                                        const std::vector<double>& grid, int k);

/// Sentinel result for kernels without a bandwidth.
BandwidthSelection no_bandwidth();

}  // namespace kernelrep
