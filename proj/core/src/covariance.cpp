#include "stmatern/covariance.hpp"

#include "stmatern/quadrature.hpp"

#include <cmath>
#include <limits>
#include <vector>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stmatern {
namespace {

constexpr int kNodes = 128;
constexpr int kCheckNodes = 64;
constexpr double kAgreeTol = 1e-11;
constexpr double kAdaptiveTol = 1e-10;

void check_gamma(double gamma) {
  if (!(gamma > 0.5) || !std::isfinite(gamma)) {
    throw std::invalid_argument("temporal covariance requires gamma > 1/2");
  }
}

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-14; }

// log of sum_{j<g} binom(g-1, j) a^{g-1-j} Gamma(g+j), scaled by a^{g-1} when a >= 1.
double log_integer_lag_integral(int g, double a) {
  const bool scaled = a >= 1.0;
  double sum = 0.0;
  double binom = 1.0;
  for (int j = 0; j < g; ++j) {
    const double apow = scaled ? std::pow(a, -j) : std::pow(a, g - 1 - j);
    sum += binom * apow * std::tgamma(g + j);
    binom = binom * (g - 1 - j) / (j + 1);
  }
  return std::log(sum) + (scaled ? (g - 1) * std::log(a) : 0.0);
}

double log_adaptive_lag_integral(double gamma, double a, bool scaled) {
  const double e = gamma - 1.0;
  auto integrand = [=](double u) {
    if (u <= 0.0) return 0.0;
    // Log form avoids inf * 0 far in the tail.
    const double log_shift = scaled ? std::log1p(u / a) : std::log(u + a);
    return std::exp(e * (std::log(u) + log_shift) - u);
  };
  double total = 0.0;
  double error = 0.0;
  auto add = [&](const quad::AdaptiveResult& seg, double factor) {
    if (!std::isfinite(seg.value) || !std::isfinite(seg.error)) {
      throw std::runtime_error("temporal_cov: adaptive quadrature failed");
    }
    total += factor * seg.value;
    error += factor * seg.error;
  };
  double lower = 0.0;
  if (!scaled) {
    // [0, a] in the variable t = u / a: a^{2e+1} int_0^1 t^e (1+t)^e e^{-a t} dt.
    auto head = [=](double t) {
      if (t <= 0.0) return 0.0;
      return std::exp(e * (std::log(t) + std::log1p(t)) - a * t);
    };
    add(quad::adaptive(head, 0.0, 1.0), std::exp((2.0 * e + 1.0) * std::log(a)));
    lower = a;
  }
  add(quad::adaptive(integrand, lower, 1.0), 1.0);
  add(quad::adaptive(integrand, 1.0, std::numeric_limits<double>::infinity()), 1.0);
  // Segment error estimates are judged against the whole integral.
  if (!(error <= kAdaptiveTol * total)) throw std::runtime_error("temporal_cov: adaptive quadrature failed");
  if (!(total > 0.0)) throw std::runtime_error("temporal_cov: nonpositive quadrature result");
  return std::log(total) + (scaled ? e * std::log(a) : 0.0);
}

}  // namespace

double log_lag_integral(double gamma, double a) {
  check_gamma(gamma);
  if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("log_lag_integral: a must be >= 0");
  if (a == 0.0) return std::lgamma(2.0 * gamma - 1.0);
  if (is_integer(gamma)) return log_integer_lag_integral(static_cast<int>(std::round(gamma)), a);

  const double e = gamma - 1.0;
  // For a >= 1 the factor a^{gamma-1} is pulled out so the integrand stays O(1).
  const bool scaled = a >= 1.0;
  auto shift = [=](double u) { return scaled ? std::pow(1.0 + u / a, e) : std::pow(u + a, e); };
  const double fine = quad::apply(*quad::cached_gauss_laguerre(e, kNodes), shift);
  const double coarse = quad::apply(*quad::cached_gauss_laguerre(e, kCheckNodes), shift);
  if (fine > 0.0 && std::abs(fine - coarse) <= kAgreeTol * fine) {
    return std::log(fine) + (scaled ? e * std::log(a) : 0.0);
  }
  return log_adaptive_lag_integral(gamma, a, scaled);
}

FrequencySpectrum frequency_coeffs(const SpdeParams& p, const SpectralBasis& b) {
  FrequencySpectrum s;
  s.gamma = p.gamma;
  s.mus.resize(b.size());
  s.lambdas.resize(b.size());
  const double k2 = p.kappa * p.kappa;
  const double scale = p.C * p.sigma * p.sigma * std::pow(p.r, -2.0 * p.gamma);
  for (std::size_t k = 0; k < b.size(); ++k) {
    const double base = k2 + b.xis()[k];
    s.mus[k] = std::pow(base, p.alpha) / p.r;
    s.lambdas[k] = scale * std::pow(base, -p.beta);
  }
  return s;
}

double marginal_var(double mu, double lambda, double gamma) {
  check_gamma(gamma);
  if (!(mu > 0.0)) throw std::invalid_argument("marginal_var: mu must be positive");
  if (lambda == 0.0) return 0.0;
  const double g = 2.0 * gamma - 1.0;
  return std::exp(std::log(lambda) + std::lgamma(g) - g * std::log(2.0 * mu) -
                  2.0 * std::lgamma(gamma));
}

double marginal_var(const FrequencySpectrum& spec, std::size_t k) {
  return marginal_var(spec.mus.at(k), spec.lambdas.at(k), spec.gamma);
}

double temporal_cov(double mu, double lambda, double gamma, double h) {
  check_gamma(gamma);
  if (!(mu > 0.0)) throw std::invalid_argument("temporal_cov: mu must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("temporal_cov: lambda must be nonnegative");
  h = std::abs(h);
  if (h == 0.0) return marginal_var(mu, lambda, gamma);
  if (lambda == 0.0) return 0.0;
  if (gamma == 1.0) return lambda * std::exp(-mu * h) / (2.0 * mu);
  const double g = 2.0 * gamma - 1.0;
  return std::exp(std::log(lambda) - mu * h - g * std::log(2.0 * mu) - 2.0 * std::lgamma(gamma) +
                  log_lag_integral(gamma, 2.0 * mu * h));
}

double temporal_corr(double mu, double gamma, double h) {
  check_gamma(gamma);
  if (!(mu > 0.0)) throw std::invalid_argument("temporal_corr: mu must be positive");
  h = std::abs(h);
  if (h == 0.0) return 1.0;
  if (gamma == 1.0) return std::exp(-mu * h);
  return std::exp(-mu * h + log_lag_integral(gamma, 2.0 * mu * h) - std::lgamma(2.0 * gamma - 1.0));
}

double normalization_constant(const SpdeParams& p, const SpectralBasis& b) {
  SpdeParams unit = p;
  unit.C = 1.0;
  const auto spec = frequency_coeffs(unit, b);
  double total = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) total += marginal_var(spec, k);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::runtime_error("normalization_constant: truncated variance is not finite and positive");
  }
  return p.sigma * p.sigma * b.domain().measure() / total;
}

SpdeParams normalize(SpdeParams p, const SpectralBasis& b) {
  p.C = normalization_constant(p, b);
  return p;
}

double space_time_cov(const SpectralBasis& b, const FrequencySpectrum& spec, const Location& s1,
                      const Location& s2, double h) {
  if (spec.size() != b.size()) throw std::invalid_argument("space_time_cov: size mismatch");
  const Eigen::VectorXd f1 = eval_basis(b, s1);
  const Eigen::VectorXd f2 = eval_basis(b, s2);
  double total = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    total += temporal_cov(spec.mus[k], spec.lambdas[k], spec.gamma, h) * f1[i] * f2[i];
  }
  return total;
}

void write_cov_curve_csv(std::ostream& os, double mu, double lambda, double gamma,
                         std::span<const double> lags) {
  os << "lag,cov,corr\n";
  os.precision(17);
  for (double h : lags) {
    os << h << ',' << temporal_cov(mu, lambda, gamma, h) << ',' << temporal_corr(mu, gamma, h)
       << '\n';
  }
}

}  // namespace stmatern
