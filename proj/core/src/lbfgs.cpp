#include "stmatern/lbfgs.hpp"

#include "stmatern/parallel.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace stmatern {
namespace {

double safe_eval(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
  double v;
  try {
    v = f(x);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

Eigen::VectorXd numerical_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double fx, double step,
                                   unsigned threads, int* evaluations) {
  const Eigen::Index n = x.size();
  std::vector<double> vals(static_cast<std::size_t>(2 * n));
  parallel_for(vals.size(), [&](std::size_t t) {
    Eigen::VectorXd xp = x;
    const auto i = static_cast<Eigen::Index>(t / 2);
    xp[i] += (t % 2 == 0) ? step : -step;
    vals[t] = safe_eval(f, xp);
  }, threads);
  if (evaluations) *evaluations += static_cast<int>(vals.size());
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double fp = vals[static_cast<std::size_t>(2 * i)];
    const double fm = vals[static_cast<std::size_t>(2 * i + 1)];
    const bool okp = std::isfinite(fp);
    const bool okm = std::isfinite(fm);
    if (okp && okm) {
      g[i] = (fp - fm) / (2.0 * step);
    } else if (okp) {
      g[i] = (fp - fx) / step;
    } else if (okm) {
      g[i] = (fx - fm) / step;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

LbfgsResult minimize_lbfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, const LbfgsOptions& opts) {
  LbfgsResult res;
  res.x = x0;
  res.f = safe_eval(f, x0);
  res.evaluations = 1;
  if (!std::isfinite(res.f)) throw std::runtime_error("minimize_lbfgs: objective not finite at the start point");
  res.trace.push_back(res.f);
  if (x0.size() == 0) {
    res.converged = true;
    res.message = "no free parameters";
    return res;
  }

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  Eigen::VectorXd g = numerical_gradient(f, res.x, res.f, opts.fd_step, opts.threads, &res.evaluations);

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      res.converged = true;
      res.message = "gradient below tolerance";
      return res;
    }
    // Two-loop recursion for d = -H g.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t j = s_hist.size(); j-- > 0;) {
      const double rho = 1.0 / y_hist[j].dot(s_hist[j]);
      alpha[j] = rho * s_hist[j].dot(q);
      q -= alpha[j] * y_hist[j];
    }
    double gamma0 = 1.0;
    if (!s_hist.empty()) gamma0 = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    Eigen::VectorXd d = gamma0 * q;
    for (std::size_t j = 0; j < s_hist.size(); ++j) {
      const double rho = 1.0 / y_hist[j].dot(s_hist[j]);
      const double beta = rho * y_hist[j].dot(d);
      d += s_hist[j] * (alpha[j] - beta);
    }
    d = -d;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    // First iteration and restarts: cap the trial step at unit length.
    double t = 1.0;
    if (s_hist.empty()) t = std::min(1.0, 1.0 / d.lpNorm<Eigen::Infinity>());

    Eigen::VectorXd x_new;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      x_new = res.x + t * d;
      f_new = safe_eval(f, x_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!s_hist.empty()) {
        s_hist.clear();
        y_hist.clear();
        continue;
      }
      res.message = "line search failed";
      res.converged = g.lpNorm<Eigen::Infinity>() <= 1e3 * opts.grad_tol;
      return res;
    }

    const Eigen::VectorXd g_new =
        numerical_gradient(f, x_new, f_new, opts.fd_step, opts.threads, &res.evaluations);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double f_old = res.f;
    res.x = x_new;
    res.f = f_new;
    g = g_new;
    res.iterations = iter + 1;
    res.trace.push_back(res.f);

    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    if (std::abs(f_old - f_new) <= opts.rel_tol * std::max({std::abs(f_old), std::abs(f_new), 1.0})) {
      res.converged = true;
      res.message = "relative objective change below tolerance";
      return res;
    }
  }
  res.message = "iteration limit reached";
  return res;
}

}  // namespace stmatern
