#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace stmatern {

struct LbfgsOptions {
  int max_iter = 200;
  int history = 8;
  /// Stop when successive objective values differ by at most
  /// rel_tol * max(|f|, 1).
  double rel_tol = 1e-6;
  double grad_tol = 1e-8;
  /// Central-difference step per coordinate.
  double fd_step = 1e-4;
  int max_line_search = 30;
  /// Concurrent objective evaluations for the gradient (0 = default pool).
  unsigned threads = 0;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
  /// Objective after each accepted iteration; nonincreasing.
  std::vector<double> trace;
};

/// Minimises f with limited-memory BFGS, numerical central-difference
/// gradients and Armijo backtracking. f may return +inf (or NaN) to mark a
/// failed evaluation; such points are never accepted. Throws
/// std::runtime_error when f is not finite at x0.
LbfgsResult minimize_lbfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, const LbfgsOptions& opts = {});

/// Central-difference gradient; falls back to a one-sided difference when one
/// side fails and to 0 when both do.
Eigen::VectorXd numerical_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double fx, double step,
                                   unsigned threads, int* evaluations = nullptr);

}  // namespace stmatern
