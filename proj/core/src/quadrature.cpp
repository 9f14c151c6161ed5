#include "stmatern/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace stmatern::quad {

Rule gauss_laguerre(double alpha, int n) {
  if (!(alpha > -1.0)) throw std::invalid_argument("gauss_laguerre: alpha must exceed -1");
  if (n < 1) throw std::invalid_argument("gauss_laguerre: n must be positive");
  // Jacobi matrix of the monic generalised Laguerre recurrence.
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) diag[i] = 2.0 * i + alpha + 1.0;
  for (int i = 1; i < n; ++i) sub[i - 1] = std::sqrt(i * (i + alpha));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw std::runtime_error("gauss_laguerre: eigensolver failed");

  const double mu0 = std::tgamma(alpha + 1.0);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * v0 * v0;
  }
  return r;
}

std::shared_ptr<const Rule> cached_gauss_laguerre(double alpha, int n) {
  static std::mutex mtx;
  static std::map<std::pair<double, int>, std::shared_ptr<const Rule>> cache;
  const auto key = std::make_pair(alpha, n);
  {
    std::lock_guard<std::mutex> lock(mtx);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const Rule>(gauss_laguerre(alpha, n));
  std::lock_guard<std::mutex> lock(mtx);
  return cache.emplace(key, std::move(rule)).first->second;
}

double apply(const Rule& rule, const std::function<double(double)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    if (rule.weights[i] == 0.0) continue;
    s += rule.weights[i] * f(rule.nodes[i]);
  }
  return s;
}

AdaptiveResult adaptive(const std::function<double(double)>& f, double a, double b,
                        double rel_tol) {
  AdaptiveResult out;
  double err = 0.0;
  double l1 = 0.0;
  try {
    if (std::isinf(b)) {
      thread_local boost::math::quadrature::exp_sinh<double> integrator;
      out.value = integrator.integrate(f, a, b, rel_tol, &err, &l1);
    } else {
      thread_local boost::math::quadrature::tanh_sinh<double> integrator;
      out.value = integrator.integrate(f, a, b, rel_tol, &err, &l1);
    }
  } catch (const std::exception&) {
    out.ok = false;
    out.error = std::numeric_limits<double>::infinity();
    return out;
  }
  out.error = err;
  out.ok = std::isfinite(out.value) && err <= 100.0 * rel_tol * std::max(l1, 1e-300);
  return out;
}

}  // namespace stmatern::quad
