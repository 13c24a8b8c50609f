#include "kernelrep/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kernelrep/error.hpp"

namespace kernelrep {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::laplacian: return "laplacian";
    case KernelFamily::linear: return "linear";
    case KernelFamily::relu_ntk: return "relu_ntk";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian" || name == "rbf") return KernelFamily::gaussian;
  if (name == "laplacian") return KernelFamily::laplacian;
  if (name == "linear") return KernelFamily::linear;
  if (name == "relu_ntk" || name == "relu") return KernelFamily::relu_ntk;
  throw InputError("unknown kernel family '" + std::string(name) + "'");
}

bool KernelSpec::has_bandwidth() const {
  return family == KernelFamily::gaussian || family == KernelFamily::laplacian;
}

KernelSpec KernelSpec::with_gamma(double g) const {
  KernelSpec out = *this;
  out.gamma = g;
  return out;
}

void KernelSpec::validate() const {
  if (has_bandwidth() && !(gamma > 0.0 && std::isfinite(gamma))) {
    throw InputError("kernel bandwidth gamma must be positive and finite");
  }
  if (family == KernelFamily::relu_ntk && depth < 1) {
    throw InputError("relu_ntk depth must be >= 1");
  }
}

std::string KernelSpec::label() const {
  std::string out(to_string(family));
  if (family == KernelFamily::relu_ntk) out += std::to_string(depth);
  return out;
}

double arccos0(double u) {
  u = std::clamp(u, -1.0, 1.0);
  // endpoints evaluated exactly
  const double angle = u == 1.0 ? 0.0 : (u == -1.0 ? std::numbers::pi : std::acos(u));
  return (std::numbers::pi - angle) / std::numbers::pi;
}

double arccos1(double u) {
  u = std::clamp(u, -1.0, 1.0);
  const double angle = u == 1.0 ? 0.0 : (u == -1.0 ? std::numbers::pi : std::acos(u));
  const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
  return (u * (std::numbers::pi - angle) + s) / std::numbers::pi;
}

double relu_ntk_of_inner(double u, int depth) {
  if (depth < 1) throw InputError("relu_ntk depth must be >= 1");
  u = std::clamp(u, -1.0, 1.0);
  double layer = u;  // kappa^l
  double ntk = u;    // kappa_NTK^l
  for (int l = 2; l <= depth; ++l) {
    const double next = arccos1(layer);
    ntk = ntk * arccos0(layer) + next;
    layer = next;
  }
  return ntk;
}

namespace {

void check_dims(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw InputError("kernel arguments have mismatched dimensions (" + std::to_string(a) +
                     " vs " + std::to_string(b) + ")");
  }
  if (a < 1) throw InputError("kernel arguments must have dimension >= 1");
}

double unchecked_eval(const KernelSpec& spec, const ConstVecRef& x, const ConstVecRef& y) {
  switch (spec.family) {
    case KernelFamily::gaussian: return std::exp(-spec.gamma * (x - y).squaredNorm());
    case KernelFamily::laplacian: return std::exp(-spec.gamma * (x - y).lpNorm<1>());
    case KernelFamily::linear: return x.dot(y);
    case KernelFamily::relu_ntk: {
      const double nx = x.norm();
      const double ny = y.norm();
      if (nx == 0.0 || ny == 0.0) throw DomainError("relu_ntk kernel is undefined for a zero vector");
      return relu_ntk_of_inner(x.dot(y) / (nx * ny), spec.depth);
    }
  }
  return 0.0;
}

}  // namespace

double eval_kernel(const KernelSpec& spec, const ConstVecRef& x, const ConstVecRef& y) {
  spec.validate();
  check_dims(x.size(), y.size());
  return unchecked_eval(spec, x, y);
}

MatrixXd gram(const KernelSpec& spec, const ConstMatRef& X, const ConstMatRef& Y) {
  spec.validate();
  check_dims(X.rows(), Y.rows());
  MatrixXd out(X.cols(), Y.cols());
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.cols(); ++i) out(i, j) = unchecked_eval(spec, X.col(i), Y.col(j));
  }
  return out;
}

MatrixXd gram(const KernelSpec& spec, const ConstMatRef& X) {
  spec.validate();
  if (X.rows() < 1) throw InputError("kernel arguments must have dimension >= 1");
  const Eigen::Index n = X.cols();
  MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = unchecked_eval(spec, X.col(i), X.col(j));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

VectorXd kernel_column(const KernelSpec& spec, const ConstMatRef& X, const ConstVecRef& x) {
  spec.validate();
  check_dims(X.rows(), x.size());
  VectorXd out(X.cols());
  for (Eigen::Index i = 0; i < X.cols(); ++i) out(i) = unchecked_eval(spec, X.col(i), x);
  return out;
}

VectorXd gram_diagonal(const KernelSpec& spec, const ConstMatRef& X) {
  spec.validate();
  if (X.rows() < 1) throw InputError("kernel arguments must have dimension >= 1");
  VectorXd out(X.cols());
  for (Eigen::Index i = 0; i < X.cols(); ++i) out(i) = unchecked_eval(spec, X.col(i), X.col(i));
  return out;
}

}  // namespace kernelrep
