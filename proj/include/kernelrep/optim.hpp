#pragma once

#include <vector>

namespace kernelrep {

/// Gradient-descent settings shared by the iterative models.
struct OptimOptions {
  double step = 1e-2;
  int max_iters = 2000;
  /// Stop when ||grad||_F <= tol * (1 + ||Z||_F).
  double tol = 1e-6;
  bool backtracking = true;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
};

struct OptimTrace {
  std::vector<double> losses;  // loss at every accepted iterate, starting with the initialisation
  int iterations = 0;
  bool converged = false;
};

}  // namespace kernelrep
