#include "kernelrep/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include "kernelrep/error.hpp"

namespace kernelrep {

using Eigen::VectorXd;

namespace {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void add_noise(MatrixXd& X, double sd, Rng& rng) {
  if (sd == 0.0) return;
  std::normal_distribution<double> normal(0.0, sd);
  for (Index j = 0; j < X.cols(); ++j) {
    for (Index i = 0; i < X.rows(); ++i) X(i, j) += normal(rng);
  }
}

/// Applies one seeded permutation to the columns and labels.
void shuffle_samples(Dataset& data, Rng& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(data.size()));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Index>(i);
  std::shuffle(perm.begin(), perm.end(), rng);
  data.X = select_columns(data.X, perm);
  data.y = select_labels(data.y, perm);
}

std::vector<Index> class_sizes_split(Index n, int classes) {
  std::vector<Index> sizes(static_cast<std::size_t>(classes), n / classes);
  for (Index c = 0; c < n % classes; ++c) ++sizes[static_cast<std::size_t>(c)];
  return sizes;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ (stream * 0xd1b54a32d192ed03ULL));
}

int Dataset::num_classes() const {
  if (y.empty()) return 0;
  return *std::max_element(y.begin(), y.end()) + 1;
}

void Dataset::validate() const {
  if (!X.allFinite()) throw InputError("dataset '" + name + "' contains NaN or Inf entries");
  if (y.empty()) return;
  if (static_cast<Index>(y.size()) != X.cols()) {
    throw InputError("dataset '" + name + "': label count does not match sample count");
  }
  const int c = num_classes();
  std::vector<int> counts(static_cast<std::size_t>(std::max(c, 0)), 0);
  for (int label : y) {
    if (label < 0) throw InputError("dataset '" + name + "': negative label");
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int k = 0; k < c; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0) {
      throw InputError("dataset '" + name + "': class " + std::to_string(k) + " is empty");
    }
  }
}

Dataset make_circles(Index n, double factor, double noise_sd, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw InputError("make_circles: n must be even and >= 2");
  if (!(factor > 0.0 && factor < 1.0)) throw InputError("make_circles: factor must lie in (0, 1)");
  if (noise_sd < 0.0) throw InputError("make_circles: noise_sd must be non-negative");
  const Index half = n / 2;
  Dataset data;
  data.name = "circles";
  data.X.resize(2, n);
  data.y.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < half; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(half);
    data.X(0, i) = std::cos(t);
    data.X(1, i) = std::sin(t);
    data.y[static_cast<std::size_t>(i)] = 0;
    data.X(0, half + i) = factor * std::cos(t);
    data.X(1, half + i) = factor * std::sin(t);
    data.y[static_cast<std::size_t>(half + i)] = 1;
  }
  Rng rng(seed);
  shuffle_samples(data, rng);
  add_noise(data.X, noise_sd, rng);
  return data;
}

Dataset make_moons(Index n, double noise_sd, std::uint64_t seed) {
  if (n < 2) throw InputError("make_moons: n must be >= 2");
  if (noise_sd < 0.0) throw InputError("make_moons: noise_sd must be non-negative");
  const Index outer = n - n / 2;
  const Index inner = n / 2;
  Dataset data;
  data.name = "moons";
  data.X.resize(2, n);
  data.y.resize(static_cast<std::size_t>(n));
  auto angle = [](Index i, Index count) {
    return count == 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
  };
  for (Index i = 0; i < outer; ++i) {
    const double t = angle(i, outer);
    data.X(0, i) = std::cos(t);
    data.X(1, i) = std::sin(t);
    data.y[static_cast<std::size_t>(i)] = 0;
  }
  for (Index i = 0; i < inner; ++i) {
    const double t = angle(i, inner);
    data.X(0, outer + i) = 1.0 - std::cos(t);
    data.X(1, outer + i) = 0.5 - std::sin(t);
    data.y[static_cast<std::size_t>(outer + i)] = 1;
  }
  Rng rng(seed);
  shuffle_samples(data, rng);
  add_noise(data.X, noise_sd, rng);
  return data;
}

Dataset make_blobs(Index n, const BlobsParams& params, std::uint64_t seed) {
  if (params.classes < 1) throw InputError("make_blobs: class count must be >= 1");
  if (n < params.classes) throw InputError("make_blobs: n must be >= number of classes");
  if (params.dim < 1) throw InputError("make_blobs: dim must be >= 1");
  if (params.cluster_sd < 0.0) throw InputError("make_blobs: cluster_sd must be non-negative");
  Rng rng(seed);
  std::uniform_real_distribution<double> box(-params.center_box, params.center_box);
  MatrixXd centers(params.dim, params.classes);
  for (Index c = 0; c < centers.cols(); ++c) {
    for (Index i = 0; i < centers.rows(); ++i) centers(i, c) = box(rng);
  }
  Dataset data;
  data.name = "blobs";
  data.X.resize(params.dim, n);
  data.y.resize(static_cast<std::size_t>(n));
  const auto sizes = class_sizes_split(n, params.classes);
  Index col = 0;
  for (int c = 0; c < params.classes; ++c) {
    for (Index k = 0; k < sizes[static_cast<std::size_t>(c)]; ++k, ++col) {
      data.X.col(col) = centers.col(c);
      data.y[static_cast<std::size_t>(col)] = c;
    }
  }
  shuffle_samples(data, rng);
  add_noise(data.X, params.cluster_sd, rng);
  return data;
}

Dataset make_cubes(Index n, const CubesParams& params, std::uint64_t seed) {
  if (params.classes < 1) throw InputError("make_cubes: class count must be >= 1");
  if (n < params.classes) throw InputError("make_cubes: n must be >= number of classes");
  if (params.dim < 1 || params.dim > 62) throw InputError("make_cubes: dim must lie in [1, 62]");
  if (static_cast<double>(params.classes) > std::ldexp(1.0, static_cast<int>(params.dim))) {
    throw InputError("make_cubes: more classes than hypercube vertices");
  }
  Rng rng(seed);
  // distinct vertices of the unit hypercube, encoded as bit masks
  std::vector<std::uint64_t> vertices;
  const std::uint64_t mask = (std::uint64_t{1} << params.dim) - 1;
  while (static_cast<int>(vertices.size()) < params.classes) {
    const std::uint64_t v = rng() & mask;
    if (std::find(vertices.begin(), vertices.end(), v) == vertices.end()) vertices.push_back(v);
  }
  Dataset data;
  data.name = "cubes";
  data.X.resize(params.dim, n);
  data.y.resize(static_cast<std::size_t>(n));
  const auto sizes = class_sizes_split(n, params.classes);
  Index col = 0;
  for (int c = 0; c < params.classes; ++c) {
    for (Index k = 0; k < sizes[static_cast<std::size_t>(c)]; ++k, ++col) {
      for (Index i = 0; i < params.dim; ++i) {
        data.X(i, col) = static_cast<double>((vertices[static_cast<std::size_t>(c)] >> i) & 1U);
      }
      data.y[static_cast<std::size_t>(col)] = c;
    }
  }
  shuffle_samples(data, rng);
  add_noise(data.X, params.spread, rng);
  return data;
}

Dataset make_named(const std::string& name, Index n, std::uint64_t seed) {
  if (name == "circles") return make_circles(n, 0.6, 0.05, seed);
  if (name == "moons") return make_moons(n, 0.1, seed);
  if (name == "blobs") return make_blobs(n, BlobsParams{}, seed);
  if (name == "cubes") return make_cubes(n, CubesParams{}, seed);
  throw InputError("unknown dataset '" + name + "' (expected circles, moons, blobs or cubes)");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open CSV file '" + path + "'");

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> row_line;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    if (first && options.has_header) {
      header = split_csv_line(line);
      for (auto& h : header) h = trim(h);
      first = false;
      continue;
    }
    first = false;
    rows.push_back(split_csv_line(line));
    row_line.push_back(line_no);
  }
  if (rows.empty()) throw LoadError("CSV file '" + path + "' has no data rows");
  const std::size_t ncols = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != ncols) {
      throw LoadError("CSV '" + path + "' line " + std::to_string(row_line[r]) + ": expected " +
                      std::to_string(ncols) + " cells, found " + std::to_string(rows[r].size()));
    }
  }

  std::optional<std::size_t> label_idx;
  if (options.label_column) {
    if (const auto* name = std::get_if<std::string>(&*options.label_column)) {
      const auto it = std::find(header.begin(), header.end(), *name);
      if (it == header.end()) throw LoadError("CSV '" + path + "': no column named '" + *name + "'");
      label_idx = static_cast<std::size_t>(it - header.begin());
    } else {
      label_idx = std::get<std::size_t>(*options.label_column);
    }
    if (*label_idx >= ncols) throw LoadError("CSV '" + path + "': label column index out of range");
  }

  const Index d = static_cast<Index>(ncols - (label_idx ? 1 : 0));
  if (d < 1) throw LoadError("CSV '" + path + "' has no feature columns");
  Dataset data;
  data.name = std::filesystem::path(path).stem().string();
  data.X.resize(d, static_cast<Index>(rows.size()));
  std::map<std::string, int> label_ids;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Index feature = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (label_idx && c == *label_idx) {
        const std::string key = trim(rows[r][c]);
        auto [it, inserted] = label_ids.emplace(key, static_cast<int>(label_ids.size()));
        data.y.push_back(it->second);
        continue;
      }
      double v = 0.0;
      if (!parse_double(rows[r][c], v)) {
        throw LoadError("CSV '" + path + "' line " + std::to_string(row_line[r]) + ", column " +
                        std::to_string(c + 1) + ": cannot parse '" + rows[r][c] + "' as a number");
      }
      data.X(feature++, static_cast<Index>(r)) = v;
    }
  }

  // standardise each feature over all rows; zero-variance features keep sd 1
  const double n = static_cast<double>(data.X.cols());
  for (Index f = 0; f < d; ++f) {
    const double mean = data.X.row(f).mean();
    const double var = (data.X.row(f).array() - mean).square().sum() / n;
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    data.X.row(f) = (data.X.row(f).array() - mean) / sd;
  }
  data.validate();
  return data;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  for (Index f = 0; f < data.dim(); ++f) out << (f ? "," : "") << 'x' << f;
  if (data.labeled()) out << ",label";
  out << '\n';
  for (Index j = 0; j < data.size(); ++j) {
    for (Index f = 0; f < data.dim(); ++f) out << (f ? "," : "") << data.X(f, j);
    if (data.labeled()) out << ',' << data.y[static_cast<std::size_t>(j)];
    out << '\n';
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary);
    if (!file) throw LoadError("cannot write '" + tmp + "'");
    file << out.str();
    if (!file) throw LoadError("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

MatrixXd select_columns(const MatrixXd& X, const std::vector<Index>& idx) {
  MatrixXd out(X.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= X.cols()) throw InputError("column index out of range");
    out.col(static_cast<Index>(k)) = X.col(idx[k]);
  }
  return out;
}

std::vector<int> select_labels(const std::vector<int>& y, const std::vector<Index>& idx) {
  if (y.empty()) return {};
  std::vector<int> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(y.at(static_cast<std::size_t>(i)));
  return out;
}

SplitIndices split(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed) {
  if (!(fractions.unlabeled > 0.0 && fractions.labeled > 0.0 && fractions.test > 0.0)) {
    throw SplitError("split fractions must all be positive");
  }
  if (std::abs(fractions.unlabeled + fractions.labeled + fractions.test - 1.0) > 1e-9) {
    throw SplitError("split fractions must sum to 1");
  }
  const Index n = data.size();
  const double nd = static_cast<double>(n);
  Index n_unl = std::llround(fractions.unlabeled * nd);
  Index n_lab = std::llround(fractions.labeled * nd);
  const int classes = data.num_classes();
  if (data.labeled()) n_lab = std::max<Index>(n_lab, classes);
  n_lab = std::max<Index>(n_lab, 1);
  n_unl = std::max<Index>(n_unl, 1);
  if (n - n_unl - n_lab < 1) throw SplitError("dataset too small for the requested split");

  Rng rng(seed);
  SplitIndices out;
  out.seed = seed;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);

  if (data.labeled()) {
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(classes));
    for (Index i = 0; i < n; ++i) members[static_cast<std::size_t>(data.y[static_cast<std::size_t>(i)])].push_back(i);
    for (auto& m : members) {
      if (m.size() < 2) throw SplitError("a class has fewer than 2 samples; cannot stratify");
      std::shuffle(m.begin(), m.end(), rng);
    }
    // proportional quotas, at least one per class, largest remainder for the rest
    std::vector<Index> quota(static_cast<std::size_t>(classes));
    std::vector<double> remainder(static_cast<std::size_t>(classes));
    Index assigned = 0;
    for (int c = 0; c < classes; ++c) {
      const double exact = static_cast<double>(n_lab) * static_cast<double>(members[static_cast<std::size_t>(c)].size()) / nd;
      quota[static_cast<std::size_t>(c)] = std::max<Index>(1, static_cast<Index>(std::floor(exact)));
      remainder[static_cast<std::size_t>(c)] = exact - std::floor(exact);
      assigned += quota[static_cast<std::size_t>(c)];
    }
    while (assigned < n_lab) {
      int best = -1;
      for (int c = 0; c < classes; ++c) {
        const auto sc = static_cast<std::size_t>(c);
        if (quota[sc] + 1 >= static_cast<Index>(members[sc].size())) continue;
        if (best < 0 || remainder[sc] > remainder[static_cast<std::size_t>(best)]) best = c;
      }
      if (best < 0) throw SplitError("classes too small to fill the labeled split");
      ++quota[static_cast<std::size_t>(best)];
      remainder[static_cast<std::size_t>(best)] = -1.0;
      ++assigned;
    }
    while (assigned > n_lab) {
      int best = -1;
      for (int c = 0; c < classes; ++c) {
        const auto sc = static_cast<std::size_t>(c);
        if (quota[sc] > 1 && (best < 0 || quota[sc] > quota[static_cast<std::size_t>(best)])) best = c;
      }
      if (best < 0) break;
      --quota[static_cast<std::size_t>(best)];
      --assigned;
    }
    for (int c = 0; c < classes; ++c) {
      const auto sc = static_cast<std::size_t>(c);
      for (Index k = 0; k < quota[sc]; ++k) {
        const Index i = members[sc][static_cast<std::size_t>(k)];
        out.labeled.push_back(i);
        taken[static_cast<std::size_t>(i)] = true;
      }
    }
    n_lab = assigned;
  } else {
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    std::shuffle(all.begin(), all.end(), rng);
    for (Index k = 0; k < n_lab; ++k) {
      out.labeled.push_back(all[static_cast<std::size_t>(k)]);
      taken[static_cast<std::size_t>(all[static_cast<std::size_t>(k)])] = true;
    }
  }

  std::vector<Index> rest;
  for (Index i = 0; i < n; ++i) {
    if (!taken[static_cast<std::size_t>(i)]) rest.push_back(i);
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  if (static_cast<Index>(rest.size()) - n_unl < 1) throw SplitError("dataset too small for the requested split");
  out.unlabeled.assign(rest.begin(), rest.begin() + n_unl);
  out.test.assign(rest.begin() + n_unl, rest.end());
  std::sort(out.unlabeled.begin(), out.unlabeled.end());
  std::sort(out.labeled.begin(), out.labeled.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

void TripletSet::validate() const {
  if (anchors.rows() != positives.rows() || anchors.rows() != negatives.rows() ||
      anchors.cols() != positives.cols() || anchors.cols() != negatives.cols()) {
    throw InputError("triplet matrices must share the same shape");
  }
  if (anchors.cols() < 1 || anchors.rows() < 1) throw InputError("triplet set is empty");
}

TripletSet make_triplets(const MatrixXd& X_train, double aug_sd, std::uint64_t seed) {
  const Index m = X_train.cols();
  if (m < 2) throw InputError("make_triplets: need at least 2 training samples for negatives");
  if (aug_sd < 0.0) throw InputError("make_triplets: aug_sd must be non-negative");
  const Index d = X_train.rows();
  VectorXd feature_sd(d);
  for (Index f = 0; f < d; ++f) {
    const double mean = X_train.row(f).mean();
    feature_sd(f) = std::sqrt((X_train.row(f).array() - mean).square().sum() / static_cast<double>(m));
  }

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Index> pick(0, m - 2);
  TripletSet out;
  out.anchors = X_train;
  out.positives = X_train;
  out.negatives.resize(d, m);
  out.negative_source.resize(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    if (aug_sd > 0.0) {
      for (Index f = 0; f < d; ++f) out.positives(f, i) += aug_sd * feature_sd(f) * normal(rng);
    }
    Index j = pick(rng);
    if (j >= i) ++j;
    out.negatives.col(i) = X_train.col(j);
    out.negative_source[static_cast<std::size_t>(i)] = j;
  }
  return out;
}

MatrixXd corrupt(const MatrixXd& X, double noise_sd, std::uint64_t seed) {
  if (noise_sd < 0.0) throw InputError("corrupt: noise_sd must be non-negative");
  MatrixXd out = X;
  Rng rng(seed);
  add_noise(out, noise_sd, rng);
  return out;
}

}  // namespace kernelrep
