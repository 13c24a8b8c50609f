#include "kernelrep/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kernelrep/diagnostics.hpp"
#include "kernelrep/downstream.hpp"
#include "kernelrep/error.hpp"
#include "kernelrep/kernel_ae.hpp"
#include "kernelrep/kpca.hpp"
#include "kernelrep/simple_contrastive.hpp"
#include "kernelrep/spectral_contrastive.hpp"

namespace kernelrep {

using json = nlohmann::json;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::raw: return "raw";
    case Method::kpca: return "kpca";
    case Method::simple: return "simple";
    case Method::spectral: return "spectral";
    case Method::ae: return "ae";
    case Method::ae_denoise: return "ae_denoise";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::raw, Method::kpca, Method::simple, Method::spectral, Method::ae, Method::ae_denoise}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("config: methods must not be empty");
  if (seeds.empty()) throw ConfigError("config: seeds must not be empty");
  if (h < 1) throw ConfigError("config: h must be >= 1");
  if (k < 1) throw ConfigError("config: k must be >= 1");
  if (!(split.unlabeled > 0 && split.labeled > 0 && split.test > 0) ||
      std::abs(split.unlabeled + split.labeled + split.test - 1.0) > 1e-9) {
    throw ConfigError("config: split fractions must be positive and sum to 1");
  }
  if (!(lambda_spectral > 0.0) || !(lambda_ae > 0.0)) throw ConfigError("config: lambdas must be positive");
  if (!(grid_min > 0.0) || grid_max < grid_min || grid_count < 1) throw ConfigError("config: invalid bandwidth grid");
  if (aug_sd < 0.0 || noise_sd < 0.0) throw ConfigError("config: aug_sd and noise_sd must be non-negative");
  if (jitter < 0.0 || spectral_jitter < 0.0 || ae_jitter < 0.0) throw ConfigError("config: jitter must be non-negative");
  for (const OptimOptions* o : {&spectral_opt, &ae_opt}) {
    if (!(o->step > 0.0) || o->max_iters < 0 || o->tol < 0.0) throw ConfigError("config: invalid optimizer settings");
  }
  bool needs_kernel = false;
  for (Method m : methods) needs_kernel = needs_kernel || m != Method::raw;
  if (needs_kernel && kernels.empty()) throw ConfigError("config: kernels must not be empty");
  try {
    for (const KernelSpec& s : kernels) s.validate();
    if (ae_decoder) {
      ae_decoder->validate();
      if (ae_decoder->family == KernelFamily::relu_ntk) throw ConfigError("config: relu_ntk cannot be the AE decoder");
    }
  } catch (const InputError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (dataset.csv.empty() && dataset.name.empty()) throw ConfigError("config: dataset needs a name or csv path");
  if (output_dir.empty()) throw ConfigError("config: output path must not be empty");
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"dataset",   "methods",  "kernels",  "h",      "k",
                                          "lambda",    "ae_decoder", "split",  "seeds",  "grid",
                                          "optimizer", "aug_sd",   "noise_sd", "jitter", "spectral_jitter",
                                          "ae_jitter", "output"};
  return keys;
}

KernelSpec parse_kernel(const json& j) {
  if (j.is_string()) {
    KernelSpec s;
    s.family = parse_kernel_family(j.get<std::string>());
    return s;
  }
  if (!j.is_object()) throw ConfigError("config: kernel entries must be strings or objects");
  KernelSpec s;
  s.family = parse_kernel_family(j.at("family").get<std::string>());
  s.gamma = j.value("gamma", 1.0);
  s.depth = j.value("depth", 1);
  return s;
}

void parse_optim(const json& j, OptimOptions& o) {
  o.step = j.value("step", o.step);
  o.max_iters = j.value("max_iters", o.max_iters);
  o.tol = j.value("tol", o.tol);
  o.backtracking = j.value("backtracking", o.backtracking);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    for (const auto& [key, value] : j.items()) {
      if (!known_keys().count(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      if (d.is_string()) {
        c.dataset.name = d.get<std::string>();
      } else {
        c.dataset.name = d.value("name", c.dataset.name);
        c.dataset.n = d.value("n", c.dataset.n);
        c.dataset.seed = d.value("seed", c.dataset.seed);
        if (d.contains("noise")) c.dataset.noise = d.at("noise").get<double>();
        c.dataset.factor = d.value("factor", c.dataset.factor);
        c.dataset.csv = d.value("csv", std::string());
        c.dataset.has_header = d.value("has_header", true);
        if (d.contains("label_column")) {
          const json& lc = d.at("label_column");
          if (lc.is_number_unsigned()) {
            c.dataset.label_column = lc.get<std::size_t>();
          } else {
            c.dataset.label_column = lc.get<std::string>();
          }
        }
        if (!c.dataset.csv.empty() && !d.contains("name")) {
          c.dataset.name = std::filesystem::path(c.dataset.csv).stem().string();
        }
      }
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("kernels")) {
      c.kernels.clear();
      for (const auto& k : j.at("kernels")) c.kernels.push_back(parse_kernel(k));
    }
    c.h = j.value("h", c.h);
    c.k = j.value("k", c.k);
    if (j.contains("lambda")) {
      const json& l = j.at("lambda");
      c.lambda_spectral = l.value("spectral", c.lambda_spectral);
      c.lambda_ae = l.value("ae", c.lambda_ae);
    }
    if (j.contains("ae_decoder")) {
      const json& d = j.at("ae_decoder");
      if (d.is_string() && d.get<std::string>() == "same") {
        c.ae_decoder.reset();
      } else {
        c.ae_decoder = parse_kernel(d);
      }
    }
    if (j.contains("split")) {
      const json& s = j.at("split");
      if (!s.is_array() || s.size() != 3) throw ConfigError("config: split must be [unlabeled, labeled, test]");
      c.split = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      c.grid_min = g.value("min", c.grid_min);
      c.grid_max = g.value("max", c.grid_max);
      c.grid_count = g.value("count", c.grid_count);
    }
    if (j.contains("optimizer")) {
      const json& o = j.at("optimizer");
      if (o.contains("spectral")) parse_optim(o.at("spectral"), c.spectral_opt);
      if (o.contains("ae")) parse_optim(o.at("ae"), c.ae_opt);
    }
    c.aug_sd = j.value("aug_sd", c.aug_sd);
    c.noise_sd = j.value("noise_sd", c.noise_sd);
    c.jitter = j.value("jitter", c.jitter);
    c.spectral_jitter = j.value("spectral_jitter", c.spectral_jitter);
    c.ae_jitter = j.value("ae_jitter", c.ae_jitter);
    c.output_dir = j.value("output", c.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Dataset load_dataset(const DatasetConfig& config) {
  if (!config.csv.empty()) {
    CsvOptions opts;
    opts.has_header = config.has_header;
    opts.label_column = config.label_column;
    Dataset d = load_csv(config.csv, opts);
    d.name = config.name;
    return d;
  }
  if (config.name == "circles") return make_circles(config.n, config.factor, config.noise.value_or(0.05), config.seed);
  if (config.name == "moons") return make_moons(config.n, config.noise.value_or(0.1), config.seed);
  if (config.name == "blobs") {
    BlobsParams p;
    if (config.noise) p.cluster_sd = *config.noise;
    return make_blobs(config.n, p, config.seed);
  }
  if (config.name == "cubes") {
    CubesParams p;
    if (config.noise) p.spread = *config.noise;
    return make_cubes(config.n, p, config.seed);
  }
  throw ConfigError("unknown dataset '" + config.name + "'");
}

namespace {

class ScoringToken {
  ScoringToken() = default;
  friend class CellRunner;
};

/// Test split; its contents are only reachable with a ScoringToken.
class SealedTestSet {
 public:
  SealedTestSet(MatrixXd X, std::vector<int> y) : X_(std::move(X)), y_(std::move(y)) {}
  const MatrixXd& features(ScoringToken) const { return X_; }
  const std::vector<int>& labels(ScoringToken) const { return y_; }

 private:
  MatrixXd X_;
  std::vector<int> y_;
};

struct SeedData {
  std::uint64_t seed = 0;
  MatrixXd X_train;  // unlabeled followed by labeled features
  MatrixXd X_lab;
  std::vector<int> y_lab;
  TripletSet triplets;
  SealedTestSet test;
};

/// A fitted representation, type-erased to the operations the pipeline needs.
struct Fitted {
  std::function<MatrixXd(const MatrixXd&)> embed;
  std::function<MatrixXd(const MatrixXd&)> reconstruct;
  BoundReport report;
  bool has_report = false;
  double fit_ms = 0.0;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

class CellRunner {
 public:
  CellRunner(const ExperimentConfig& config, const std::string& dataset) : config_(config), dataset_(dataset) {
    grid_ = log_grid(config.grid_min, config.grid_max, config.grid_count);
  }

  std::vector<ResultRecord> run(Method method, const std::optional<KernelSpec>& kernel, const SeedData& data) const {
    ResultRecord base;
    base.dataset = dataset_;
    base.method = std::string(to_string(method));
    base.kernel = kernel ? kernel->label() : "none";
    base.seed = data.seed;

    if (method == Method::raw) {
      const ScoringToken token;
      const KnnClassifier clf(data.X_lab, data.y_lab, knn_k(data));
      ResultRecord r = base;
      r.metric_name = "accuracy";
      r.metric_value = accuracy(clf, data.test.features(token), data.test.labels(token));
      return {r};
    }

    // bandwidth selection on the labeled split only; test data stays sealed
    std::map<std::size_t, Fitted> fits;
    BandwidthSelection sel;
    Fitted chosen;
    if (kernel->has_bandwidth()) {
      std::size_t g_index = 0;
      std::map<double, std::size_t> index_of;
      for (std::size_t g = 0; g < grid_.size(); ++g) index_of[grid_[g]] = g;
      sel = loo_select_bandwidth(
          [&](double gamma) {
            g_index = index_of.at(gamma);
            Fitted f = fit(method, kernel->with_gamma(gamma), data);
            MatrixXd emb = f.embed(data.X_lab);
            fits.emplace(g_index, std::move(f));
            return emb;
          },
          data.y_lab, grid_, config_.k);
      chosen = std::move(fits.at(*sel.chosen_index));
    } else {
      sel = no_bandwidth();
      chosen = fit(method, *kernel, data);
    }
    return score(method, base, sel, chosen, data);
  }

 private:
  int knn_k(const SeedData& data) const {
    return static_cast<int>(std::min<Index>(config_.k, static_cast<Index>(data.y_lab.size())));
  }

  Fitted fit(Method method, const KernelSpec& spec, const SeedData& data) const {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    Fitted out;
    const int h = config_.h;
    switch (method) {
      case Method::kpca: {
        auto model = std::make_shared<KPCAModel>(fit_kpca(data.X_train, spec, h));
        out.embed = [model](const MatrixXd& X) { return model->embed_batch(X); };
        const auto ct = complexity_terms(data.X_train, spec, h);
        out.report = {ct.alpha, ct.kappa, 0.0, 0.0, model_norm(*model), 0.0, data.X_train.cols()};
        break;
      }
      case Method::simple: {
        auto model = std::make_shared<SimpleContrastiveModel>(fit_simple(data.triplets, spec, h, config_.jitter));
        out.embed = [model](const MatrixXd& X) { return model->embed_batch(X); };
        const auto ct = complexity_terms(data.triplets, spec, h);
        out.report = {ct.alpha, ct.kappa, 0.0, 0.0, model_norm(*model), 0.0, data.triplets.size()};
        break;
      }
      case Method::spectral: {
        auto model = std::make_shared<SpectralModel>(fit_spectral(data.triplets, spec, h, config_.lambda_spectral,
                                                                  config_.spectral_opt, derive_seed(data.seed, 2),
                                                                  config_.spectral_jitter));
        out.embed = [model](const MatrixXd& X) { return model->embed_batch(X); };
        const auto ct = complexity_terms(data.triplets, spec, h);
        out.report = {ct.alpha, ct.kappa, 0.0, 0.0, model_norm(*model), 0.0, data.triplets.size()};
        break;
      }
      case Method::ae:
      case Method::ae_denoise: {
        const KernelSpec dec = config_.ae_decoder.value_or(spec);
        AeFitOptions opts;
        opts.denoising = method == Method::ae_denoise;
        opts.noise_sd = config_.noise_sd;
        opts.jitter_scale = config_.ae_jitter;
        auto model = std::make_shared<KernelAEModel>(
            fit_ae(data.X_train, spec, dec, h, config_.lambda_ae, config_.ae_opt, derive_seed(data.seed, 3), opts));
        out.embed = [model](const MatrixXd& X) { return model->embed_batch(X); };
        out.reconstruct = [model](const MatrixXd& X) { return model->reconstruct_batch(X); };
        const auto ct = complexity_terms(model->X_enc, spec, h);
        const AeNorms norms = model_norms(*model);
        out.report = {ct.alpha, ct.kappa, gamma_of(dec), model->lambda * (norms.encoder + norms.decoder),
                      norms.encoder + norms.decoder, norms.decoder, data.X_train.cols()};
        break;
      }
      case Method::raw:
        break;
    }
    out.has_report = method != Method::raw;
    out.fit_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    return out;
  }

  std::vector<ResultRecord> score(Method method, const ResultRecord& base, const BandwidthSelection& sel,
                                  const Fitted& fitted, const SeedData& data) const {
    const ScoringToken token;
    const MatrixXd& X_test = data.test.features(token);
    const std::vector<int>& y_test = data.test.labels(token);

    ResultRecord r = base;
    r.bandwidth = sel.chosen;
    r.fit_ms = fitted.fit_ms;
    if (fitted.has_report) {
      r.alpha = fitted.report.alpha;
      r.kappa = fitted.report.kappa;
      if (method == Method::ae || method == Method::ae_denoise) r.gamma = fitted.report.gamma;
      r.w_norm_sq = fitted.report.w_norm_sq;
    }

    std::vector<ResultRecord> out;
    const KnnClassifier clf(fitted.embed(data.X_lab), data.y_lab, knn_k(data));
    r.metric_name = "accuracy";
    r.metric_value = accuracy(clf, fitted.embed(X_test), y_test);
    out.push_back(r);

    if (method == Method::ae_denoise) {
      const MatrixXd noisy = corrupt(X_test, config_.noise_sd, derive_seed(data.seed, 4));
      const MatrixXd recon = fitted.reconstruct(noisy);
      const double denom = static_cast<double>(X_test.size());
      ResultRecord m = r;
      m.metric_name = "mse";
      m.metric_value = (recon - X_test).squaredNorm() / denom;
      out.push_back(m);
      ResultRecord b = r;
      b.metric_name = "mse_identity";
      b.metric_value = (noisy - X_test).squaredNorm() / denom;
      out.push_back(b);
    }
    return out;
  }

  const ExperimentConfig& config_;
  std::string dataset_;
  std::vector<double> grid_;
};

SeedData prepare_seed(const Dataset& data, const ExperimentConfig& config, std::uint64_t seed) {
  const SplitIndices idx = split(data, config.split, derive_seed(seed, 1));
  std::vector<Index> train = idx.unlabeled;
  train.insert(train.end(), idx.labeled.begin(), idx.labeled.end());
  SeedData out{seed,
               select_columns(data.X, train),
               select_columns(data.X, idx.labeled),
               select_labels(data.y, idx.labeled),
               {},
               SealedTestSet(select_columns(data.X, idx.test), select_labels(data.y, idx.test))};
  out.triplets = make_triplets(out.X_train, config.aug_sd, derive_seed(seed, 5));
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  std::ostream& log = options.log ? *options.log : std::cerr;
  const Dataset data = load_dataset(config.dataset);
  data.validate();
  if (!data.labeled()) throw ConfigError("dataset '" + data.name + "' has no labels");
  const std::string name = config.dataset.csv.empty() ? config.dataset.name : data.name;
  const CellRunner runner(config, name);

  ExperimentResult result;
  for (std::uint64_t seed : config.seeds) {
    const SeedData seed_data = prepare_seed(data, config, seed);
    for (Method method : config.methods) {
      std::vector<std::optional<KernelSpec>> kernels;
      if (method == Method::raw) {
        kernels.emplace_back(std::nullopt);
      } else {
        kernels.assign(config.kernels.begin(), config.kernels.end());
      }
      for (const auto& kernel : kernels) {
        std::vector<ResultRecord> rows;
        try {
          rows = runner.run(method, kernel, seed_data);
        } catch (const std::exception& e) {
          ResultRecord r;
          r.dataset = name;
          r.method = std::string(to_string(method));
          r.kernel = kernel ? kernel->label() : "none";
          r.seed = seed;
          r.metric_name = "error:" + sanitize(e.what());
          r.metric_value = std::nan("");
          rows.push_back(r);
        }
        if (!options.quiet) {
          const ResultRecord& r = rows.front();
          log << '[' << name << "] " << r.method << ' ' << r.kernel << " seed=" << seed
              << " bandwidth=" << (r.bandwidth ? fmt(*r.bandwidth) : "n/a") << ' ' << r.metric_name << '='
              << fmt(r.metric_value) << " (" << fmt(r.fit_ms) << " ms)\n";
        }
        result.records.insert(result.records.end(), rows.begin(), rows.end());
      }
    }
  }
  result.aggregates = aggregate(result.records);
  return result;
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRecord>& records) {
  std::vector<AggregateRow> rows;
  std::vector<std::vector<double>> values;
  for (const ResultRecord& r : records) {
    if (r.failed()) continue;
    std::size_t slot = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].dataset == r.dataset && rows[i].method == r.method && rows[i].kernel == r.kernel &&
          rows[i].metric_name == r.metric_name) {
        slot = i;
        break;
      }
    }
    if (slot == rows.size()) {
      rows.push_back({r.dataset, r.method, r.kernel, r.metric_name, 0.0, 0.0, 0});
      values.emplace_back();
    }
    values[slot].push_back(r.metric_value);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& v = values[i];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    rows[i].mean = mean;
    rows[i].sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    rows[i].n_seeds = static_cast<int>(v.size());
  }
  return rows;
}

std::string format_results_csv(const std::vector<ResultRecord>& records) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const ResultRecord& r : records) {
    out << r.dataset << ',' << r.method << ',' << r.kernel << ',' << (r.bandwidth ? fmt(*r.bandwidth) : "n/a") << ','
        << r.seed << ',' << r.metric_name << ',' << fmt(r.metric_value) << ',' << fmt(r.fit_ms) << ','
        << fmt(r.alpha) << ',' << fmt(r.kappa) << ',' << fmt(r.gamma) << ',' << fmt(r.w_norm_sq) << '\n';
  }
  return out.str();
}

std::string format_aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << kAggregateHeader << '\n';
  for (const AggregateRow& r : rows) {
    out << r.dataset << ',' << r.method << ',' << r.kernel << ',' << r.metric_name << ',' << fmt(r.mean) << ','
        << fmt(r.sd) << ',' << r.n_seeds << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp + "'");
    out << contents;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace kernelrep
