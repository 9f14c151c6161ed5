#pragma once

#include "stmatern/params.hpp"
#include "stmatern/spectral.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace stmatern {

/// Per-frequency temporal decay rates mu_k and variance scales lambda_k.
struct FrequencySpectrum {
  std::vector<double> mus;
  std::vector<double> lambdas;
  double gamma = 1.0;

  std::size_t size() const { return mus.size(); }
};

/// mu_k = (kappa^2 + xi_k)^alpha / r and lambda_k = C sigma^2 r^{-2 gamma} (kappa^2 + xi_k)^{-beta}.
FrequencySpectrum frequency_coeffs(const SpdeParams& p, const SpectralBasis& b);

/// log of int_0^inf u^{gamma-1} (u + a)^{gamma-1} e^{-u} du for a >= 0.
/// Generalised Gauss-Laguerre with 128 nodes, cross-checked against 64 nodes;
/// falls back to double-exponential quadrature when the two disagree.
/// Throws std::runtime_error when neither scheme converges.
double log_lag_integral(double gamma, double a);

/// Stationary covariance of one spectral coefficient at time lag h (even in h).
double temporal_cov(double mu, double lambda, double gamma, double h);
/// temporal_cov normalised by its lag-0 value; exactly 1 at h = 0.
double temporal_corr(double mu, double gamma, double h);

/// lambda Gamma(2 gamma - 1) / ((2 mu)^{2 gamma - 1} Gamma(gamma)^2).
double marginal_var(double mu, double lambda, double gamma);
double marginal_var(const FrequencySpectrum& spec, std::size_t k);

/// C such that the domain-averaged truncated stationary variance
/// (1/|D|) sum_k C_{c_k}(0) equals sigma^2. The C field of p is ignored.
double normalization_constant(const SpdeParams& p, const SpectralBasis& b);
/// Copy of p with C set by normalization_constant.
SpdeParams normalize(SpdeParams p, const SpectralBasis& b);

/// Truncated space-time covariance sum_k C_{c_k}(h) f_k(s1) f_k(s2).
double space_time_cov(const SpectralBasis& b, const FrequencySpectrum& spec, const Location& s1,
                      const Location& s2, double h);

/// CSV with header lag,cov,corr for one frequency.
void write_cov_curve_csv(std::ostream& os, double mu, double lambda, double gamma,
                         std::span<const double> lags);

}  // namespace stmatern
