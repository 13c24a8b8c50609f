#include "kernelrep/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "kernelrep/error.hpp"

namespace kernelrep {

namespace {

void require_square(const MatrixXd& M, const char* what) {
  if (M.rows() != M.cols()) throw InputError(std::string(what) + ": matrix must be square");
}

void require_finite(const MatrixXd& M, const char* what) {
  if (!M.allFinite()) throw InputError(std::string(what) + ": matrix has non-finite entries");
}

}  // namespace

MatrixXd symmetrized(const MatrixXd& M) {
  require_square(M, "symmetrized");
  return 0.5 * (M + M.transpose());
}

SymEig sym_eig(const MatrixXd& M) {
  require_square(M, "sym_eig");
  require_finite(M, "sym_eig");
  const Eigen::Index m = M.rows();
  SymEig out;
  if (m == 0) return out;

  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(symmetrized(M));
  if (solver.info() != Eigen::Success) throw InputError("sym_eig: eigensolver did not converge");

  // Eigen returns ascending order; reverse with a stable sort on value.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::reverse(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return solver.eigenvalues()(a) > solver.eigenvalues()(b);
  });

  out.values.resize(m);
  out.vectors.resize(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = solver.eigenvalues()(src);
    VectorXd v = solver.eigenvectors().col(src);
    const double tiny = 1e-12 * v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::abs(v(i)) > tiny) {
        if (v(i) < 0.0) v = -v;
        break;
      }
    }
    out.vectors.col(k) = v;
  }
  return out;
}

double jitter_shift(const MatrixXd& M, double jitter_scale) {
  require_square(M, "jitter_shift");
  if (jitter_scale < 0.0) throw InputError("jitter_scale must be non-negative");
  if (M.rows() == 0) return 0.0;
  return jitter_scale * std::max(0.0, M.trace()) / static_cast<double>(M.rows());
}

MatrixXd inv_sqrt_psd(const MatrixXd& M, double jitter_scale) {
  require_square(M, "inv_sqrt_psd");
  const double eps = jitter_shift(M, jitter_scale);
  const SymEig eig = sym_eig(M);
  const Eigen::Index m = M.rows();
  if (m == 0) return MatrixXd(0, 0);

  const double scale = eig.values.cwiseAbs().maxCoeff();
  if (eig.values(m - 1) < -1e-6 * scale) {
    throw NotPsdError("inv_sqrt_psd: matrix is not positive semidefinite (min eigenvalue " +
                      std::to_string(eig.values(m - 1)) + ")");
  }
  VectorXd d(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double shifted = std::max(0.0, eig.values(i)) + eps;
    if (!(shifted > 0.0)) {
      throw SingularError("inv_sqrt_psd: matrix is singular at this jitter; raise jitter_scale");
    }
    d(i) = 1.0 / std::sqrt(shifted);
  }
  MatrixXd S = eig.vectors * d.asDiagonal() * eig.vectors.transpose();
  return symmetrized(S);
}

PsdRange psd_range(const MatrixXd& M, double floor) {
  const SymEig eig = sym_eig(M);
  const Eigen::Index m = M.rows();
  if (m > 0) {
    const double scale = eig.values.cwiseAbs().maxCoeff();
    if (eig.values(m - 1) < -1e-6 * scale) {
      throw NotPsdError("psd_range: matrix is not positive semidefinite");
    }
  }
  Eigen::Index r = 0;
  while (r < m && eig.values(r) > floor) ++r;
  return {eig.vectors.leftCols(r), eig.values.head(r)};
}

ShiftedSolver::ShiftedSolver(const MatrixXd& K, double shift) : shift_(shift) {
  require_square(K, "ShiftedSolver");
  require_finite(K, "ShiftedSolver");
  const Eigen::Index n = K.rows();
  MatrixXd A = symmetrized(K);
  A.diagonal().array() += shift;
  ldlt_.compute(A);
  if (ldlt_.info() != Eigen::Success) {
    throw SingularError("factorisation of K + shift*I failed; raise jitter_scale");
  }
  if (n == 0) return;
  const VectorXd d = ldlt_.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const double dmin = d.minCoeff();
  if (!(dmax > 0.0) || dmin <= static_cast<double>(n) * 1e-15 * dmax) {
    throw SingularError("K + shift*I is singular or indefinite; raise jitter_scale");
  }
}

ShiftedSolver ShiftedSolver::jittered(const MatrixXd& K, double jitter_scale) {
  return ShiftedSolver(K, jitter_shift(K, jitter_scale));
}

MatrixXd ShiftedSolver::solve(const MatrixXd& B) const {
  if (B.rows() != size()) throw InputError("ShiftedSolver::solve: row count mismatch");
  return ldlt_.solve(B);
}

VectorXd ShiftedSolver::solve(const VectorXd& b) const {
  if (b.size() != size()) throw InputError("ShiftedSolver::solve: length mismatch");
  return ldlt_.solve(b);
}

MatrixXd ridge_solve(const MatrixXd& K, double lambda, const MatrixXd& B) {
  if (lambda < 0.0) throw InputError("ridge_solve: lambda must be non-negative");
  require_square(K, "ridge_solve");
  if (B.rows() != K.rows()) throw InputError("ridge_solve: K and B have mismatched row counts");
  const ShiftedSolver solver(K, lambda);
  MatrixXd out = solver.solve(B);
  // one step of iterative refinement keeps the residual at rounding level
  MatrixXd A = symmetrized(K);
  A.diagonal().array() += lambda;
  out += solver.solve(MatrixXd(B - A * out));
  return out;
}

}  // namespace kernelrep
