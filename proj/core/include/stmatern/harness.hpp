#pragma once

#include "stmatern/inference.hpp"
#include "stmatern/kalman.hpp"
#include "stmatern/params.hpp"
#include "stmatern/spectral.hpp"
#include "stmatern/statespace.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stmatern {

/// Independent seed for a job identified by up to three indices.
std::uint64_t job_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Covariance verification.

struct VerifyCase {
  std::string label;
  double r_t = 1.0;
  double beta_s = 0.25;
};

struct VerifyConfig {
  RectangleDomain dom = RectangleDomain::interval(1.0);
  std::size_t M = 256;
  double dt = 0.05;
  int grid_n = 21;
  double nu_s = 0.5;
  double r_s = 0.25;
  double sigma = 1.0;
  std::vector<double> nu_t = default_sweep();
  std::vector<int> ms{1, 2, 3};
  std::vector<VerifyCase> cases = default_cases();

  /// nu_t = 0.30, 0.30 + step, ..., 3.00.
  static std::vector<double> default_sweep(double step = 0.05);
  /// r_t in {1, 3} x beta_s in {0.25, 0.5}.
  static std::vector<VerifyCase> default_cases();
  /// Largest lag index ceil(r_t / dt) for one case.
  long max_lag(const VerifyCase& c) const;
};

struct VerifyRow {
  std::string label;
  double r_t = 0.0;
  double beta_s = 0.0;
  double nu_t = 0.0;
  int m = 0;
  double gamma = 0.0;
  double sup_error = 0.0;
};

/// Max over grid pairs (s1, s2) and lags 0..max_lag of the absolute difference
/// between the truncated covariance with exact temporal factors and the one
/// with C_{c_k}(0) times the ARMA autocorrelation.
double covariance_sup_error(const NaturalParams& p, const SpectralBasis& b, double dt, int grid_n,
                            int m, long max_lag);

/// Every (case, nu_t, m) combination in config order.
std::vector<VerifyRow> verify_covariance(const VerifyConfig& cfg, unsigned threads = 0);

/// CSV with header case,r_t,beta_s,nu_t,m,gamma,sup_error.
void write_verify_csv(std::ostream& os, const std::vector<VerifyRow>& rows);

// Spatial truncation rate.

struct RateConfig {
  RectangleDomain dom = RectangleDomain::interval(1.0);
  NaturalParams params{NaturalValues{0.5, 1.0, 0.25, 1.0, 0.5, 1.0, 1.0}};
  std::vector<std::size_t> Ms{32, 64, 128, 256};
  std::size_t reference_terms = std::size_t{1} << 20;
  int grid_n = 21;
};

struct RateResult {
  std::vector<std::size_t> Ms;
  /// sup over grid points of the lag-0 truncation error C(s, s) - C_M(s, s).
  std::vector<double> errors;
  double slope = 0.0;
  double expected_slope = 0.0;
};

/// Truncation errors against a reference_terms-term sum of the diagonal
/// lag-0 covariance and their least-squares log-log slope in M.
RateResult spatial_rate_check(const RateConfig& cfg);

/// CSV with header M,error then a final row slope,<value>.
void write_rate_csv(std::ostream& os, const RateResult& r);

// Simulation study.

struct Scenario {
  std::string label;
  double beta_s = 0.25;
  double sigma_obs = 0.35;
};

/// Observations of a simulated truth at uniformly drawn stations.
struct SyntheticData {
  SpectralBasis basis;
  /// M x (N + 1) coefficient paths; column n is t_n.
  Eigen::MatrixXd coeffs;
  ObservationSet obs;
};

/// Draws coefficients by simulate_exact and n_locs stations uniformly in
/// [loc_low, loc_high]^d, observed at steps 1..N with N(0, sigma_obs^2) noise.
SyntheticData simulate_dataset(const NaturalParams& truth, const RectangleDomain& dom, std::size_t M,
                               const TimeGrid& grid, std::size_t n_locs, double loc_low,
                               double loc_high, std::uint64_t seed);

struct SimStudyConfig {
  std::vector<Scenario> scenarios = default_scenarios();
  /// beta_s and sigma_obs are overwritten per scenario.
  NaturalValues truth{1.0, 1.0, 1.0, 10.0, 0.25, 3.5, 0.35};
  RectangleDomain dom = RectangleDomain::rectangle(1.0, 1.0);
  long N = 45;
  double dt = 1.0;
  std::size_t M_sim = 1024;
  std::size_t M_inf = 64;
  std::size_t n_locs = 250;
  double loc_low = 0.2;
  double loc_high = 0.8;
  int replicates = 5;
  /// Rational order of the Full model.
  int m = 1;
  int grid_n = 21;
  /// nu_s of the Simple model.
  double simple_nu_s = 1.0;
  LbfgsOptions optimizer;
  std::vector<ModelKind> models{ModelKind::Full, ModelKind::Simple};

  /// LL, LH, HL, HH: beta_s in {0.25, 0.75} x sigma_obs in {0.35, 0.75}.
  static std::vector<Scenario> default_scenarios();
};

struct ReplicateResult {
  std::string scenario;
  int replicate = 0;
  ModelKind model = ModelKind::Full;
  bool ok = false;
  std::string error;
  FitResult fit;
  Scores filter;
  Scores forecast;
  double seconds = 0.0;
};

struct SimStudyResult {
  std::vector<ReplicateResult> rows;
  std::size_t failures = 0;
};

/// Filtered and one-step-ahead coefficient means and covariances at every
/// step 1..N of obs under a fitted model.
struct CoefficientPredictions {
  Eigen::MatrixXd filter_mean;
  Eigen::MatrixXd forecast_mean;
  std::vector<Eigen::MatrixXd> filter_cov;
  std::vector<Eigen::MatrixXd> forecast_cov;
};
CoefficientPredictions predict_coefficients(const BlockStateSpace& ss, const ObservationSet& obs,
                                            std::span<const double> beta, double sigma_obs);

/// Per scenario, replicate and model: simulate training data, fit, simulate an
/// independent test set, filter it with the fitted parameters and score
/// filtering and forecasting against the test truth. Failed jobs are kept
/// with ok = false and counted. on_done is called after every job.
SimStudyResult simstudy(const SimStudyConfig& cfg, std::uint64_t seed, unsigned threads = 0,
                        const std::function<void(const ReplicateResult&)>& on_done = {});

/// Long format: scenario,replicate,model,param,estimate,truth.
void write_simstudy_estimates_csv(std::ostream& os, const SimStudyConfig& cfg,
                                  const SimStudyResult& r);
/// scenario,replicate,model,kind,rmse,crps with kind in {filter, forecast}.
void write_simstudy_scores_csv(std::ostream& os, const SimStudyResult& r);

// Block cross-validation.

enum class StripeAxis { X, Y };

struct CvConfig {
  int n_folds = 5;
  /// Stripe width in domain units.
  double block_size = 0.2;
  StripeAxis axis = StripeAxis::X;
  std::vector<ModelKind> models{ModelKind::Full, ModelKind::Simple};
  std::size_t M = 64;
  int m = 1;
  LbfgsOptions optimizer;
  /// nu_s of the Simple model.
  double simple_nu_s = 0.5;
  /// Starting values; default_init on the training data when unset.
  std::optional<NaturalParams> init;
};

/// Stripe index floor((x - origin) / block_size) along the axis, assigned to
/// folds round-robin. Throws std::invalid_argument when a fold is empty.
std::vector<int> assign_folds(std::span<const Location> locs, const RectangleDomain& dom,
                              int n_folds, double block_size, StripeAxis axis);

struct StationScores {
  Scores filter;
  Scores forecast;
  std::size_t n = 0;
};

/// Filters train with (beta, theta) and scores predictive distributions,
/// including sigma_obs^2, against every observation of test.
StationScores score_stations(const BlockStateSpace& ss, const ObservationSet& train,
                             const ObservationSet& test, std::span<const double> beta, double sigma_obs);

struct FoldResult {
  int fold = 0;
  ModelKind model = ModelKind::Full;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  FitResult fit;
  StationScores scores;
};

struct CvSummary {
  ModelKind model = ModelKind::Full;
  Scores filter;
  Scores forecast;
};

struct CvResult {
  std::vector<int> folds;
  std::vector<FoldResult> rows;
  std::vector<CvSummary> summary;
};

/// RMSE combined as the root mean of squared fold values, CRPS as the mean.
Scores combine_fold_scores(const std::vector<Scores>& folds);

/// k = 1 trains and tests on all stations.
CvResult block_cv(const ObservationSet& obs, const RectangleDomain& dom, const TimeGrid& grid,
                  const CvConfig& cfg, unsigned threads = 0);

/// fold,model,n_train,n_test,loglik,<params>,filter_rmse,filter_crps,forecast_rmse,forecast_crps
/// followed by one row per model with fold = all.
void write_cv_csv(std::ostream& os, const CvResult& r);

}  // namespace stmatern
