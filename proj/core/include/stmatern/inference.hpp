#pragma once

#include "stmatern/kalman.hpp"
#include "stmatern/lbfgs.hpp"
#include "stmatern/params.hpp"
#include "stmatern/spectral.hpp"
#include "stmatern/statespace.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stmatern {

struct OlsResult {
  /// Intercept first, then one coefficient per covariate column.
  std::vector<double> beta;
  std::vector<std::string> names;
  /// Copy of the input with values replaced by y - G beta.
  ObservationSet residuals;
};

/// Least squares of every observation on (1, covariates of its station).
/// Throws std::invalid_argument naming the linearly dependent columns when
/// the design is rank deficient.
OlsResult ols_fixed_effects(const ObservationSet& obs);

enum class ModelKind {
  Full,    // all seven parameters free
  Simple,  // nu_t = 0.5, beta_s = 0 and nu_s fixed at the initial value
};

ModelKind parse_model_kind(const std::string& s);
std::string to_string(ModelKind kind);

/// Free-coordinate mask in OptCoord order.
std::array<bool, kNumOptCoords> free_mask(ModelKind kind);

/// Initial values adjusted to the kind (Simple forces nu_t = 0.5, beta_s = 0).
NaturalParams initial_params(ModelKind kind, const NaturalParams& init);

struct FitConfig {
  ModelKind kind = ModelKind::Full;
  /// Rational order used for non-integer gamma.
  int m = 1;
  LbfgsOptions optimizer;
};

struct FitResult {
  std::vector<double> beta_hat;
  NaturalParams theta_hat{NaturalValues{}};
  double loglik = 0.0;
  double loglik_init = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
  /// Best log-likelihood after each iteration; nondecreasing.
  std::vector<double> trace;
};

/// Kalman log-likelihood of mean-zero residual data under p. Throws on
/// model-construction or filter failure.
double model_loglik(const NaturalParams& p, const SpectralBasis& b, const TimeGrid& grid, int m,
                    const ObservationSet& residuals);

/// Maximises model_loglik over the free coordinates in optimiser space.
/// Failed evaluations count as -inf. Throws std::runtime_error when the
/// initial point cannot be evaluated.
FitResult fit_mle(const ObservationSet& residuals, const SpectralBasis& b, const TimeGrid& grid,
                  const NaturalParams& init, const FitConfig& cfg);

/// Default starting point: nu_t = nu_s = 1.25, beta_s = 0.5, r_t = 5 dt,
/// r_s = half the longest domain side, sigma = sd(residuals) and
/// sigma_obs = 0.3 sd(residuals).
NaturalParams default_init(const ObservationSet& residuals, const RectangleDomain& dom,
                           const TimeGrid& grid);

/// OLS fixed effects, then fit_mle on the residuals; beta_hat is filled in.
FitResult fit_two_step(const ObservationSet& obs, const SpectralBasis& b, const TimeGrid& grid,
                       const NaturalParams& init, const FitConfig& cfg,
                       std::vector<std::string>* beta_names = nullptr);

/// sd [z (2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi)], z = (y - mean) / sd.
/// Throws std::invalid_argument for sd <= 0.
double crps_gaussian(double y, double mean, double sd);

/// sqrt(mean_n sum_k (c_k^n - chat_k^n)^2), matching frequencies between the
/// truth basis and the (smaller) prediction basis; chat = 0 beyond M_inf.
/// truth is M_sim x N, pred is M_inf x N.
double coefficient_rmse(const Eigen::MatrixXd& truth, const SpectralBasis& truth_basis,
                        const Eigen::MatrixXd& pred, const SpectralBasis& pred_basis);

/// Mean Gaussian CRPS over all entries (sd = sqrt(var)).
double mean_crps(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& mean, const Eigen::MatrixXd& var);

/// n x n equidistant nodes covering the closed domain, x varying fastest.
std::vector<Location> score_grid(const RectangleDomain& dom, int n = 21);

struct Scores {
  double rmse = 0.0;
  double crps = 0.0;
};

/// RMSE by coefficient_rmse and CRPS on the score grid, with Gaussian
/// predictive distributions N(H c_hat, diag(H C H^T)) at every step.
/// pred_cov holds the M_inf x M_inf coefficient covariance of each step.
Scores score_predictions(const Eigen::MatrixXd& truth, const SpectralBasis& truth_basis,
                         const Eigen::MatrixXd& pred, const std::vector<Eigen::MatrixXd>& pred_cov,
                         const SpectralBasis& pred_basis, int grid_n = 21);

}  // namespace stmatern
