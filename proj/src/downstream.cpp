#include "kernelrep/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "kernelrep/error.hpp"

namespace kernelrep {

KnnClassifier::KnnClassifier(MatrixXd points, std::vector<int> labels, int k)
    : points_(std::move(points)), labels_(std::move(labels)), k_(k) {
  if (static_cast<Index>(labels_.size()) != points_.cols()) {
    throw InputError("KnnClassifier: label count does not match point count");
  }
  if (k_ < 1) throw InputError("KnnClassifier: k must be >= 1");
  if (points_.cols() > 0 && k_ > points_.cols()) throw InputError("KnnClassifier: k exceeds stored points");
}

int KnnClassifier::predict(const VectorXd& query) const {
  if (empty()) throw StateError("KnnClassifier: no stored points");
  if (query.size() != points_.rows()) throw InputError("KnnClassifier: query dimension mismatch");
  const Index m = points_.cols();
  std::vector<double> dist(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) dist[static_cast<std::size_t>(j)] = (points_.col(j) - query).squaredNorm();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)];
  });

  std::map<int, int> votes;
  for (int r = 0; r < k_; ++r) ++votes[labels_[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])]];
  int top = 0;
  for (const auto& [label, count] : votes) top = std::max(top, count);
  // first neighbour (in distance order) whose label has the top vote count
  for (int r = 0; r < k_; ++r) {
    const int label = labels_[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    if (votes[label] == top) return label;
  }
  return labels_[static_cast<std::size_t>(order.front())];
}

std::vector<int> KnnClassifier::predict_batch(const MatrixXd& queries) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(queries.cols()));
  for (Index j = 0; j < queries.cols(); ++j) out.push_back(predict(queries.col(j)));
  return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw InputError("accuracy: length mismatch");
  if (truth.empty()) throw InputError("accuracy: no samples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1U : 0U;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double accuracy(const KnnClassifier& clf, const MatrixXd& queries, const std::vector<int>& truth) {
  if (static_cast<std::size_t>(queries.cols()) != truth.size()) throw InputError("accuracy: length mismatch");
  return accuracy(clf.predict_batch(queries), truth);
}

double loo_accuracy(const MatrixXd& points, const std::vector<int>& labels, int k) {
  const Index m = points.cols();
  if (m < 2) throw InputError("loo_accuracy: need at least 2 labeled points");
  if (static_cast<Index>(labels.size()) != m) throw InputError("loo_accuracy: label count mismatch");
  if (!points.allFinite()) return 0.0;
  const int fold_k = static_cast<int>(std::min<Index>(k, m - 1));
  std::size_t hits = 0;
  for (Index i = 0; i < m; ++i) {
    MatrixXd rest(points.rows(), m - 1);
    std::vector<int> rest_labels;
    rest_labels.reserve(static_cast<std::size_t>(m - 1));
    for (Index j = 0, c = 0; j < m; ++j) {
      if (j == i) continue;
      rest.col(c++) = points.col(j);
      rest_labels.push_back(labels[static_cast<std::size_t>(j)]);
    }
    const KnnClassifier clf(std::move(rest), std::move(rest_labels), fold_k);
    hits += clf.predict(points.col(i)) == labels[static_cast<std::size_t>(i)] ? 1U : 0U;
  }
  return static_cast<double>(hits) / static_cast<double>(m);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi >= lo)) throw InputError("log_grid: need 0 < lo <= hi");
  if (count < 1) throw InputError("log_grid: count must be >= 1");
  if (count == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

BandwidthSelection no_bandwidth() { return {}; }

BandwidthSelection loo_select_bandwidth(const LabeledEmbedder& embed_labeled,
                                        const std::vector<int>& labels,
                                        const std::vector<double>& grid, int k) {
  if (labels.size() < 2) throw InputError("loo_select_bandwidth: need at least 2 labeled points");
  if (grid.empty()) throw InputError("loo_select_bandwidth: empty grid");
  BandwidthSelection out;
  out.scores.assign(grid.size(), -1.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    try {
      out.scores[g] = loo_accuracy(embed_labeled(grid[g]), labels, k);
    } catch (const std::exception&) {
      out.scores[g] = -1.0;
    }
  }
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (out.scores[g] < 0.0) continue;
    if (!best || out.scores[g] > out.scores[*best] ||
        (out.scores[g] == out.scores[*best] && grid[g] < grid[*best])) {
      best = g;
    }
  }
  if (!best) throw SelectionError("bandwidth selection: every grid value failed to fit");
  out.chosen_index = best;
  out.chosen = grid[*best];
  return out;
}

}  // namespace kernelrep
