#include "stmatern/rational.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace stmatern {
namespace {

constexpr int kLawsonIters = 300;
constexpr int kPolishEvals = 3000;
// Zeros and poles must clear the unit circle by this margin.
constexpr double kRootMargin = 1e-9;
// Minimum zero-pole distance separating a genuine fit from a common factor.
constexpr double kMinSeparation = 1e-9;

const std::vector<double>& fit_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g(kRationalGridSize);
    for (int i = 0; i < kRationalGridSize; ++i) g[i] = static_cast<double>(i) / (kRationalGridSize - 1);
    return g;
  }();
  return grid;
}

double real_poly(std::span<const double> c, double x) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

struct Candidate {
  std::vector<double> p;
  std::vector<double> q;
};

Candidate unpack(const Eigen::VectorXd& c, int m) {
  Candidate out;
  out.p.assign(c.data(), c.data() + m + 1);
  out.q.assign(1, 1.0);
  out.q.insert(out.q.end(), c.data() + m + 1, c.data() + 2 * m + 1);
  return out;
}

bool roots_clear_disc(std::span<const double> poly) {
  for (const auto& r : poly_roots(poly)) {
    if (!(std::abs(r) > 1.0 + kRootMargin)) return false;
  }
  return true;
}

double separation(std::span<const double> p, std::span<const double> q) {
  const auto zp = poly_roots(p);
  const auto zq = poly_roots(q);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : zp) {
    for (const auto& b : zq) best = std::min(best, std::abs(a - b) / std::max(1.0, std::abs(a)));
  }
  return best;
}

bool admissible(const Candidate& c) {
  if (!(std::abs(c.p[0]) > 1e-8)) return false;
  for (double v : c.p) if (!std::isfinite(v)) return false;
  for (double v : c.q) if (!std::isfinite(v)) return false;
  return roots_clear_disc(c.p) && roots_clear_disc(c.q) && separation(c.p, c.q) > kMinSeparation;
}

double max_residual(const Candidate& c, std::span<const double> y) {
  const auto& x = fit_grid();
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e = std::max(e, std::abs(real_poly(c.p, x[i]) / real_poly(c.q, x[i]) - y[i]));
  }
  return e;
}

// Lawson-reweighted Sanathanan-Koerner iteration on p(x) - y q(x), q(0) = 1.
std::pair<double, Eigen::VectorXd> lawson(std::span<const double> y, int m) {
  const auto& x = fit_grid();
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const int nc = 2 * m + 1;

  Eigen::MatrixXd A(n, nc);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double pw = 1.0;
    for (int j = 0; j <= m; ++j, pw *= x[i]) A(i, j) = pw;
    pw = x[i];
    for (int j = 1; j <= m; ++j, pw *= x[i]) A(i, m + j) = -y[i] * pw;
    rhs[i] = y[i];
  }

  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd qv = Eigen::VectorXd::Ones(n);
  double best_err = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;

  for (int it = 0; it < kLawsonIters; ++it) {
    const Eigen::VectorXd sw = w.array().sqrt() / qv.array().abs();
    const Eigen::MatrixXd Aw = sw.asDiagonal() * A;
    const Eigen::VectorXd bw = sw.cwiseProduct(rhs);
    const Eigen::VectorXd c = Aw.colPivHouseholderQr().solve(bw);
    if (!c.allFinite()) break;

    const Candidate cand = unpack(c, m);
    Eigen::VectorXd err(n);
    double emax = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      qv[i] = real_poly(cand.q, x[i]);
      err[i] = real_poly(cand.p, x[i]) / qv[i] - y[i];
      emax = std::max(emax, std::abs(err[i]));
    }
    if (!std::isfinite(emax)) break;
    if (emax < best_err && admissible(cand)) {
      best_err = emax;
      best = c;
    }
    w = w.cwiseProduct(err.cwiseAbs());
    const double total = w.sum();
    if (!(total > 0.0)) break;
    w /= total;
    w = w.cwiseMax(1e-300);
  }
  return {best_err, best};
}

// Nelder-Mead on the max-norm residual; inadmissible points score +inf.
std::pair<double, Eigen::VectorXd> polish(std::span<const double> y, int m, Eigen::VectorXd start,
                                          double start_err) {
  const int nc = static_cast<int>(start.size());
  int evals = 0;
  auto objective = [&](const Eigen::VectorXd& c) {
    ++evals;
    const Candidate cand = unpack(c, m);
    if (!admissible(cand)) return std::numeric_limits<double>::infinity();
    return max_residual(cand, y);
  };

  std::vector<Eigen::VectorXd> simplex(nc + 1, start);
  std::vector<double> f(nc + 1, start_err);
  for (int j = 0; j < nc; ++j) {
    simplex[j + 1][j] += std::abs(start[j]) > 1e-8 ? 0.02 * start[j] : 1e-4;
    f[j + 1] = objective(simplex[j + 1]);
  }

  std::vector<int> order(nc + 1);
  while (evals < kPolishEvals) {
    for (int j = 0; j <= nc; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
    const int lo = order.front();
    const int hi = order.back();
    const int second = order[nc - 1];
    if (f[hi] - f[lo] <= 1e-15 * std::max(f[lo], 1e-300)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(nc);
    for (int j = 0; j <= nc; ++j) {
      if (j != hi) centroid += simplex[j];
    }
    centroid /= nc;

    const Eigen::VectorXd xr = centroid + (centroid - simplex[hi]);
    const double fr = objective(xr);
    if (fr < f[lo]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - simplex[hi]);
      const double fe = objective(xe);
      if (fe < fr) {
        simplex[hi] = xe;
        f[hi] = fe;
      } else {
        simplex[hi] = xr;
        f[hi] = fr;
      }
    } else if (fr < f[second]) {
      simplex[hi] = xr;
      f[hi] = fr;
    } else {
      const bool outside = fr < f[hi];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                         : Eigen::VectorXd(centroid + 0.5 * (simplex[hi] - centroid));
      const double fc = objective(xc);
      if (fc < (outside ? fr : f[hi])) {
        simplex[hi] = xc;
        f[hi] = fc;
      } else {
        for (int j = 0; j <= nc; ++j) {
          if (j == lo) continue;
          simplex[j] = simplex[lo] + 0.5 * (simplex[j] - simplex[lo]);
          f[j] = objective(simplex[j]);
        }
      }
    }
  }
  const auto best = std::min_element(f.begin(), f.end()) - f.begin();
  return {f[static_cast<std::size_t>(best)], simplex[static_cast<std::size_t>(best)]};
}

}  // namespace

std::vector<std::complex<double>> poly_roots(std::span<const double> ascending) {
  std::size_t deg = ascending.size();
  while (deg > 0 && ascending[deg - 1] == 0.0) --deg;
  if (deg <= 1) return {};
  const int n = static_cast<int>(deg) - 1;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  const double lead = ascending[deg - 1];
  for (int j = 0; j < n; ++j) comp(0, j) = -ascending[deg - 2 - j] / lead;
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<std::complex<double>> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
  return out;
}

std::complex<double> eval_poly(std::span<const double> ascending, std::complex<double> z) {
  std::complex<double> v = 0.0;
  for (std::size_t i = ascending.size(); i-- > 0;) v = v * z + ascending[i];
  return v;
}

std::complex<double> eval_rational(const RationalApprox& ra, std::complex<double> z) {
  return eval_poly(ra.p, z) / eval_poly(ra.q, z);
}

std::complex<double> frac_power(std::complex<double> z, double eta) {
  if (eta == 0.0) return 1.0;
  const std::complex<double> w = 1.0 - z;
  if (w == 0.0) return 0.0;
  return std::pow(w, eta);
}

double grid_error(const RationalApprox& ra) {
  const auto& x = fit_grid();
  double e = 0.0;
  for (double xi : x) {
    e = std::max(e, std::abs(real_poly(ra.p, xi) / real_poly(ra.q, xi) - std::pow(1.0 - xi, ra.eta)));
  }
  return e;
}

double disc_error(const RationalApprox& ra, int n_samples) {
  if (n_samples < 1) throw std::invalid_argument("disc_error: n_samples must be positive");
  for (const auto& r : poly_roots(ra.q)) {
    if (std::abs(r) <= 1.0) return std::numeric_limits<double>::infinity();
  }
  constexpr int kRings = 8;
  double worst = 0.0;
  auto visit = [&](std::complex<double> z) {
    const auto qz = eval_poly(ra.q, z);
    if (std::abs(qz) == 0.0) {
      worst = std::numeric_limits<double>::infinity();
      return;
    }
    const double e = std::abs(frac_power(z, ra.eta) - eval_poly(ra.p, z) / qz);
    worst = std::isfinite(e) ? std::max(worst, e) : std::numeric_limits<double>::infinity();
  };
  visit(0.0);
  for (int ring = 1; ring <= kRings + 1; ++ring) {
    const double radius = static_cast<double>(ring) / (kRings + 1);
    for (int s = 0; s < n_samples; ++s) {
      visit(std::polar(radius, 2.0 * std::numbers::pi * s / n_samples));
    }
  }
  return worst;
}

double min_root_separation(const RationalApprox& ra) { return separation(ra.p, ra.q); }

RationalApprox fit_rational(double eta, int m) {
  if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("fit_rational: eta must lie in [0, 1)");
  if (m < 0 || m > kMaxRationalOrder) {
    throw std::invalid_argument("fit_rational: order m must lie in [0, 3]");
  }
  RationalApprox ra;
  ra.m = m;
  ra.eta = eta;
  ra.p.assign(m + 1, 0.0);
  ra.q.assign(m + 1, 0.0);
  if (eta == 0.0) {
    ra.p = {1.0};
    ra.q = {1.0};
    ra.p.resize(m + 1, 0.0);
    ra.q.resize(m + 1, 0.0);
    ra.grid_error = 0.0;
    return ra;
  }
  if (m == 0) {
    // y ranges over [0, 1] on the grid; the best constant is the midpoint.
    ra.p = {0.5};
    ra.q = {1.0};
    ra.grid_error = grid_error(ra);
    ra.warning = true;
    return ra;
  }

  const auto& x = fit_grid();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::pow(1.0 - x[i], eta);

  auto [err, coeffs] = lawson(y, m);
  if (m > 1) {
    // The order m - 1 fit, padded with zeros, is admissible at order m.
    const auto lower = std::make_unique<RationalApprox>(fit_rational(eta, m - 1));
    if (lower->grid_error < err) {
      coeffs = Eigen::VectorXd::Zero(2 * m + 1);
      for (int j = 0; j < m; ++j) coeffs[j] = lower->p[static_cast<std::size_t>(j)];
      for (int j = 1; j < m; ++j) coeffs[m + j] = lower->q[static_cast<std::size_t>(j)];
      err = lower->grid_error;
    }
  }
  if (!std::isfinite(err)) throw std::runtime_error("fit_rational: no admissible rational fit found");
  auto [perr, pcoeffs] = polish(y, m, coeffs, err);
  if (perr < err) coeffs = pcoeffs;

  const Candidate c = unpack(coeffs, m);
  ra.p = c.p;
  ra.q = c.q;
  ra.grid_error = grid_error(ra);
  return ra;
}

std::shared_ptr<const RationalApprox> cached_rational(double eta, int m) {
  static std::mutex mtx;
  static std::map<std::pair<long long, int>, std::shared_ptr<const RationalApprox>> cache;
  const long long key_eta = std::llround(eta * 1e6);
  const auto key = std::make_pair(key_eta, m);
  {
    std::lock_guard<std::mutex> lock(mtx);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto fit = std::make_shared<const RationalApprox>(fit_rational(static_cast<double>(key_eta) * 1e-6, m));
  std::lock_guard<std::mutex> lock(mtx);
  return cache.emplace(key, std::move(fit)).first->second;
}

}  // namespace stmatern
