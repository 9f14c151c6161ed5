#pragma once

#include "stmatern/rational.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stmatern {

/// Error raised while building the model of one frequency; index is 0-based.
class FrequencyError : public std::runtime_error {
 public:
  FrequencyError(std::size_t index, const std::string& what);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// gamma = floor + eta with eta on the 1e-6 grid used by the rational cache.
/// Values within 5e-7 of an integer are treated as integers.
struct GammaSplit {
  int floor = 1;
  double eta = 0.0;
  bool integer() const { return eta == 0.0; }
};
GammaSplit split_gamma(double gamma);

/// ARMA(m + floor(gamma), m) coefficients for one frequency:
///   c^n = sum_i phi_i c^{n-i} + eps^n + sum_i theta_i eps^{n-i}.
struct ArmaCoeffs {
  std::vector<double> phi;
  std::vector<double> theta;
  double sigma2 = 1.0;
  double mu = 1.0;
  double gamma = 1.0;
  double dt = 1.0;
  int floor_gamma = 1;
  /// Rational order actually used; 0 for integer gamma.
  int m = 0;
  std::shared_ptr<const RationalApprox> ra;
  /// Set by arma_coefficients: phi and theta are expansions of the factors above.
  bool factored = false;
};

/// Expands p(e^{-mu dt} B)(1 - e^{-mu dt} B)^{floor(gamma)} and q(e^{-mu dt} B)
/// via phi_i = -e^{-mu i dt} sum_j (-1)^{i-j} binom(g, i-j) p_j / p_0 and
/// theta_i = e^{-mu i dt} q_i / q_0. Integer gamma ignores ra (p = q = 1).
/// Throws std::invalid_argument for a mismatched eta or vanishing p_0, q_0.
ArmaCoeffs arma_coefficients(double mu, double gamma, double dt,
                             std::shared_ptr<const RationalApprox> ra);

/// Roots of 1 - sum phi_i z^i (respectively 1 + sum theta_i z^i) outside |z| <= 1.
/// Factored coefficients are judged on e^{-mu dt} and the roots of p and q,
/// since a repeated root 1/e^{-mu dt} of the expansion is ill-conditioned.
bool is_causal(const ArmaCoeffs& ac);
bool is_invertible(const ArmaCoeffs& ac);

/// Companion form for the state (c^n..c^{n-n_ar+1}, eps^n..eps^{n-m+1}) with
/// n_ar = max(m + floor(gamma), 1).
struct FrequencyBlock {
  Eigen::MatrixXd F;
  Eigen::MatrixXd Sigma;
  Eigen::MatrixXd S_stat;
  double sigma2 = 1.0;
  int n_ar = 1;
  int m = 0;
  double spectral_radius = 0.0;

  int size() const { return n_ar + m; }
};

FrequencyBlock companion(const ArmaCoeffs& ac);

/// Largest eigenvalue modulus of F.
double spectral_radius(const Eigen::MatrixXd& F);

/// max(ceil(10 r_t / dt), 200).
long init_steps(double r_t, double dt);

/// Runs S^n = F S^{n-1} F^T + Sigma from S^0 = I with unit innovation variance
/// for init_steps(r_t, dt) steps (evaluated in closed form), then rescales sigma2
/// and S_stat so that S_stat(0, 0) = target_var. Throws FrequencyError
/// carrying index when rho(F) >= 1 or the recursion is not finite.
FrequencyBlock stationary_init(FrequencyBlock fb, double target_var, double r_t, double dt,
                               std::size_t index = 0);

/// S^n after n steps of the covariance recursion with the block's current Sigma,
/// evaluated as S_inf + F^n (S0 - S_inf) F^nT with S_inf the Lyapunov fixed point.
Eigen::MatrixXd covariance_recursion(const FrequencyBlock& fb, const Eigen::MatrixXd& S0, long n);

/// psi-weights of the causal MA(infinity) form, truncated once the remaining
/// squared mass is below 1e-14 of the total, extended by extra terms.
std::vector<double> psi_weights(const ArmaCoeffs& ac, std::size_t extra = 0);

/// sigma2 sum_j psi_j psi_{j+h} for h = 0..max_lag. Throws std::domain_error
/// for non-causal coefficients.
std::vector<double> arma_acvf(const ArmaCoeffs& ac, std::size_t max_lag);
/// arma_acvf divided by its lag-0 value.
std::vector<double> arma_acf(const ArmaCoeffs& ac, std::size_t max_lag);

/// c_n = (-1)^n binom(-gamma, n) e^{-mu n dt}, n = 0..n_max.
std::vector<double> frac_ma_weights(double mu, double gamma, double dt, std::size_t n_max);
/// sum_j c_j c_{j+n} / sum_j c_j^2 for n = 0..max_lag with automatic truncation.
std::vector<double> frac_ma_acf(double mu, double gamma, double dt, std::size_t max_lag);

/// arma_coefficients, companion and stationary_init in sequence.
FrequencyBlock build_frequency_block(double mu, double gamma, double dt,
                                     std::shared_ptr<const RationalApprox> ra, double target_var,
                                     double r_t, std::size_t index = 0);

struct ArmaDiagnostics {
  std::size_t k = 0;
  ArmaCoeffs coeffs;
  FrequencyBlock block;
};
/// CSV with header k,phi,theta,sigma2,spectral_radius,stationary_var; phi and
/// theta are ';'-separated lists.
void write_arma_diagnostics_csv(std::ostream& os, std::span<const ArmaDiagnostics> rows);

}  // namespace stmatern
