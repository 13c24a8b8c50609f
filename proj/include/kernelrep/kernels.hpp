#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace kernelrep {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstVecRef = Eigen::Ref<const VectorXd>;
using ConstMatRef = Eigen::Ref<const MatrixXd>;

enum class KernelFamily { gaussian, laplacian, linear, relu_ntk };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Kernel family plus its parameters. `gamma` is the bandwidth of the
/// gaussian and laplacian kernels, `depth` the layer count of relu_ntk.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double gamma = 1.0;
  int depth = 1;

  static KernelSpec gaussian(double gamma) { return {KernelFamily::gaussian, gamma, 1}; }
  static KernelSpec laplacian(double gamma) { return {KernelFamily::laplacian, gamma, 1}; }
  static KernelSpec linear() { return {KernelFamily::linear, 1.0, 1}; }
  static KernelSpec relu_ntk(int depth) { return {KernelFamily::relu_ntk, 1.0, depth}; }

  /// True for families with a tunable bandwidth (gaussian, laplacian).
  bool has_bandwidth() const;
  /// Same spec with `gamma` replaced; only meaningful when has_bandwidth().
  KernelSpec with_gamma(double g) const;
  void validate() const;
  /// Short label such as "gaussian" or "relu_ntk2".
  std::string label() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Arc-cosine functions of order 0 and 1; `u` is clamped into [-1, 1].
double arccos0(double u);
double arccos1(double u);

/// L-layer ReLU NTK as a function of the inner product of unit vectors.
double relu_ntk_of_inner(double u, int depth);

/// Kernel value k(x, y). relu_ntk normalises both arguments to unit norm.
double eval_kernel(const KernelSpec& spec, const ConstVecRef& x, const ConstVecRef& y);

/// Cross-Gram matrix with entries k(X[:, i], Y[:, j]). Columns are samples.
MatrixXd gram(const KernelSpec& spec, const ConstMatRef& X, const ConstMatRef& Y);

/// Gram matrix of X against itself; exactly symmetric.
MatrixXd gram(const KernelSpec& spec, const ConstMatRef& X);

/// Vector of k(X[:, i], x).
VectorXd kernel_column(const KernelSpec& spec, const ConstMatRef& X, const ConstVecRef& x);

/// Diagonal k(X[:, i], X[:, i]) without forming the full Gram.
VectorXd gram_diagonal(const KernelSpec& spec, const ConstMatRef& X);

}  // namespace kernelrep
