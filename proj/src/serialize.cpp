#include "kernelrep/serialize.hpp"

#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "kernelrep/error.hpp"

namespace kernelrep {

namespace {

class Writer {
 public:
  Writer(std::ostream& out, const std::string& type) : out_(out) {
    out_.precision(17);
    out_ << "kernelrep-model " << kModelFormatVersion << "\ntype " << type << '\n';
  }
  ~Writer() { out_ << "end\n"; }
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void kernel(const std::string& name, const KernelSpec& spec) {
    out_ << "kernel " << name << ' ' << to_string(spec.family) << ' ' << spec.gamma << ' ' << spec.depth << '\n';
  }
  void scalar(const std::string& name, double v) { out_ << "scalar " << name << ' ' << v << '\n'; }
  void matrix(const std::string& name, const MatrixXd& M) {
    out_ << "matrix " << name << ' ' << M.rows() << ' ' << M.cols() << '\n';
    for (Index i = 0; i < M.rows(); ++i) {
      for (Index j = 0; j < M.cols(); ++j) out_ << (j ? " " : "") << M(i, j);
      out_ << '\n';
    }
  }

 private:
  std::ostream& out_;
};

struct Record {
  std::string type;
  std::map<std::string, KernelSpec> kernels;
  std::map<std::string, double> scalars;
  std::map<std::string, MatrixXd> matrices;

  const KernelSpec& kernel(const std::string& name) const {
    const auto it = kernels.find(name);
    if (it == kernels.end()) throw LoadError("model file: missing kernel '" + name + "'");
    return it->second;
  }
  double scalar(const std::string& name) const {
    const auto it = scalars.find(name);
    if (it == scalars.end()) throw LoadError("model file: missing scalar '" + name + "'");
    return it->second;
  }
  const MatrixXd& matrix(const std::string& name) const {
    const auto it = matrices.find(name);
    if (it == matrices.end()) throw LoadError("model file: missing matrix '" + name + "'");
    return it->second;
  }
};

double parse_number(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw LoadError("model file: bad number '" + token + "'");
  return v;
}

std::string read_header(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "kernelrep-model") throw LoadError("not a kernelrep model file");
  if (version != kModelFormatVersion) {
    throw LoadError("unsupported model format version " + std::to_string(version));
  }
  std::string key;
  std::string type;
  if (!(in >> key >> type) || key != "type") throw LoadError("model file: missing type line");
  return type;
}

Record read_record(std::istream& in, const std::string& expected_type) {
  Record rec;
  rec.type = read_header(in);
  if (rec.type != expected_type) {
    throw LoadError("model file holds a '" + rec.type + "' model, expected '" + expected_type + "'");
  }
  std::string key;
  while (in >> key) {
    if (key == "end") return rec;
    std::string name;
    if (!(in >> name)) break;
    if (key == "kernel") {
      std::string family;
      std::string gamma;
      int depth = 1;
      if (!(in >> family >> gamma >> depth)) break;
      rec.kernels[name] = KernelSpec{parse_kernel_family(family), parse_number(gamma), depth};
    } else if (key == "scalar") {
      std::string value;
      if (!(in >> value)) break;
      rec.scalars[name] = parse_number(value);
    } else if (key == "matrix") {
      Index rows = 0;
      Index cols = 0;
      if (!(in >> rows >> cols) || rows < 0 || cols < 0) break;
      MatrixXd M(rows, cols);
      std::string token;
      for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
          if (!(in >> token)) throw LoadError("model file: truncated matrix '" + name + "'");
          M(i, j) = parse_number(token);
        }
      }
      rec.matrices[name] = std::move(M);
    } else {
      throw LoadError("model file: unknown entry '" + key + "'");
    }
  }
  throw LoadError("model file: unexpected end of input");
}

OptimTrace trace_from(const Record& rec) {
  OptimTrace t;
  const MatrixXd& losses = rec.matrix("losses");
  t.losses.assign(losses.data(), losses.data() + losses.size());
  t.iterations = static_cast<int>(rec.scalar("iterations"));
  t.converged = rec.scalar("converged") != 0.0;
  return t;
}

MatrixXd losses_row(const OptimTrace& t) {
  MatrixXd out(1, static_cast<Index>(t.losses.size()));
  for (std::size_t i = 0; i < t.losses.size(); ++i) out(0, static_cast<Index>(i)) = t.losses[i];
  return out;
}

MatrixXd index_row(const std::vector<Index>& idx) {
  MatrixXd out(1, static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(0, static_cast<Index>(i)) = static_cast<double>(idx[i]);
  return out;
}

}  // namespace

std::string peek_model_type(std::istream& in) { return read_header(in); }

void save_model(std::ostream& out, const SimpleContrastiveModel& model) {
  Writer w(out, "simple");
  w.kernel("spec", model.spec);
  w.scalar("h", model.h);
  w.scalar("objective", model.objective);
  w.scalar("eigen_warning", model.eigen_warning ? 1.0 : 0.0);
  w.scalar("jitter_scale", model.jitter_scale);
  w.matrix("A", model.A);
  w.matrix("top_eigenvalues", model.top_eigenvalues);
  w.matrix("anchors", model.triplets.anchors);
  w.matrix("positives", model.triplets.positives);
  w.matrix("negatives", model.triplets.negatives);
  w.matrix("negative_source", index_row(model.triplets.negative_source));
}

SimpleContrastiveModel load_simple_model(std::istream& in) {
  const Record rec = read_record(in, "simple");
  SimpleContrastiveModel m;
  m.spec = rec.kernel("spec");
  m.h = static_cast<int>(rec.scalar("h"));
  m.objective = rec.scalar("objective");
  m.eigen_warning = rec.scalar("eigen_warning") != 0.0;
  m.jitter_scale = rec.scalar("jitter_scale");
  m.A = rec.matrix("A");
  m.top_eigenvalues = rec.matrix("top_eigenvalues");
  m.triplets.anchors = rec.matrix("anchors");
  m.triplets.positives = rec.matrix("positives");
  m.triplets.negatives = rec.matrix("negatives");
  const MatrixXd& src = rec.matrix("negative_source");
  for (Index i = 0; i < src.size(); ++i) m.triplets.negative_source.push_back(static_cast<Index>(src(i)));
  m.triplets.validate();
  if (m.A.rows() != 2 * m.triplets.size() || m.A.cols() != m.h) throw LoadError("model file: inconsistent A shape");
  return m;
}

void save_model(std::ostream& out, const SpectralModel& model) {
  Writer w(out, "spectral");
  w.kernel("spec", model.spec);
  w.scalar("lambda", model.lambda);
  w.scalar("jitter_scale", model.jitter_scale);
  w.scalar("iterations", model.trace.iterations);
  w.scalar("converged", model.trace.converged ? 1.0 : 0.0);
  w.matrix("Z", model.Z);
  w.matrix("points", model.points);
  w.matrix("losses", losses_row(model.trace));
}

SpectralModel load_spectral_model(std::istream& in) {
  const Record rec = read_record(in, "spectral");
  SpectralModel m;
  m.spec = rec.kernel("spec");
  m.lambda = rec.scalar("lambda");
  m.jitter_scale = rec.scalar("jitter_scale");
  m.Z = rec.matrix("Z");
  m.points = rec.matrix("points");
  m.trace = trace_from(rec);
  refresh_spectral(m);
  return m;
}

void save_model(std::ostream& out, const KernelAEModel& model) {
  Writer w(out, "ae");
  w.kernel("spec_enc", model.spec_enc);
  w.kernel("spec_dec", model.spec_dec);
  w.scalar("lambda", model.lambda);
  w.scalar("jitter_scale", model.jitter_scale);
  w.scalar("denoising", model.denoising ? 1.0 : 0.0);
  w.scalar("random_init", model.random_init ? 1.0 : 0.0);
  w.scalar("iterations", model.trace.iterations);
  w.scalar("converged", model.trace.converged ? 1.0 : 0.0);
  w.matrix("Z", model.Z);
  w.matrix("X_train", model.X_train);
  w.matrix("X_enc", model.X_enc);
  w.matrix("losses", losses_row(model.trace));
}

KernelAEModel load_ae_model(std::istream& in) {
  const Record rec = read_record(in, "ae");
  KernelAEModel m;
  m.spec_enc = rec.kernel("spec_enc");
  m.spec_dec = rec.kernel("spec_dec");
  m.lambda = rec.scalar("lambda");
  m.jitter_scale = rec.scalar("jitter_scale");
  m.denoising = rec.scalar("denoising") != 0.0;
  m.random_init = rec.scalar("random_init") != 0.0;
  m.Z = rec.matrix("Z");
  m.X_train = rec.matrix("X_train");
  m.X_enc = rec.matrix("X_enc");
  m.trace = trace_from(rec);
  refresh_ae(m);
  return m;
}

void save_model(std::ostream& out, const KPCAModel& model) {
  Writer w(out, "kpca");
  w.kernel("spec", model.spec);
  w.scalar("total_mean", model.total_mean);
  w.matrix("X_train", model.X_train);
  w.matrix("alphas", model.alphas);
  w.matrix("eigenvalues", model.eigenvalues);
  w.matrix("row_means", model.row_means);
  w.matrix("train_embedding", model.train_embedding);
}

KPCAModel load_kpca_model(std::istream& in) {
  const Record rec = read_record(in, "kpca");
  KPCAModel m;
  m.spec = rec.kernel("spec");
  m.total_mean = rec.scalar("total_mean");
  m.X_train = rec.matrix("X_train");
  m.alphas = rec.matrix("alphas");
  m.eigenvalues = rec.matrix("eigenvalues");
  m.row_means = rec.matrix("row_means");
  m.train_embedding = rec.matrix("train_embedding");
  return m;
}

}  // namespace kernelrep
