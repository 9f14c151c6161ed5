#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace stmatern::quad {

/// Nodes and weights of an n-point rule.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Generalised Gauss-Laguerre rule for the weight x^alpha e^{-x} on (0, inf),
/// alpha > -1, via the Golub-Welsch eigenproblem.
Rule gauss_laguerre(double alpha, int n);

/// Process-wide cache keyed on (alpha, n); safe for concurrent callers.
std::shared_ptr<const Rule> cached_gauss_laguerre(double alpha, int n);

/// Sum of w_i f(x_i).
double apply(const Rule& rule, const std::function<double(double)>& f);

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  bool ok = false;
};

/// Double-exponential quadrature of f on [a, b] (b may be +inf). Endpoint
/// singularities at a are allowed. ok is false when the error estimate
/// exceeds rel_tol * L1 or the integrator throws.
AdaptiveResult adaptive(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-13);

}  // namespace stmatern::quad
