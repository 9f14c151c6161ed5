#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace stmatern {

inline constexpr int kMaxRationalOrder = 3;
inline constexpr int kRationalGridSize = 1001;

/// Degree-(m, m) real rational approximation p/q of (1 - x)^eta on [0, 1].
/// Coefficients are in ascending degree with q[0] = 1.
struct RationalApprox {
  int m = 0;
  double eta = 0.0;
  std::vector<double> p{1.0};
  std::vector<double> q{1.0};
  double grid_error = 0.0;
  /// Set when m = 0 is requested for eta > 0 and only a constant could be fitted.
  bool warning = false;
};

/// Max-norm fit on the 1001-point grid of [0, 1]: Lawson-reweighted linearised
/// least squares followed by a Nelder-Mead polish. Zeros and poles are kept
/// outside the closed unit disc. Deterministic in (eta, m).
/// Throws std::invalid_argument for eta outside [0, 1) or m outside [0, 3],
/// std::runtime_error when no admissible fit is found.
RationalApprox fit_rational(double eta, int m);

/// fit_rational memoised on (eta rounded to 1e-6, m); thread-safe.
std::shared_ptr<const RationalApprox> cached_rational(double eta, int m);

std::complex<double> eval_poly(std::span<const double> ascending, std::complex<double> z);
std::complex<double> eval_rational(const RationalApprox& ra, std::complex<double> z);

/// Principal branch of (1 - z)^eta, with 0^eta = 0 for eta > 0.
std::complex<double> frac_power(std::complex<double> z, double eta);

/// Max |(1 - z)^eta - p(z)/q(z)| over n_samples points on each of the boundary
/// circle and eight interior rings plus z = 0. Infinite if q has a root in the
/// closed unit disc.
double disc_error(const RationalApprox& ra, int n_samples);

/// Max residual on the fit grid.
double grid_error(const RationalApprox& ra);

/// Complex roots of a polynomial given in ascending degree (trailing zeros
/// trimmed). Empty for constants.
std::vector<std::complex<double>> poly_roots(std::span<const double> ascending);

/// Smallest distance between a root of p and a root of q; +inf if either is constant.
double min_root_separation(const RationalApprox& ra);

}  // namespace stmatern
