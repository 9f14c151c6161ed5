#pragma once

#include "stmatern/spectral.hpp"
#include "stmatern/statespace.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stmatern {

struct Observation {
  std::size_t loc = 0;  // index into ObservationSet::locations
  double value = 0.0;
};

/// Observations on steps n = 1..N at fixed stations. A missing observation is
/// simply absent from its step. Covariates are static per station.
struct ObservationSet {
  std::vector<Location> locations;
  Eigen::MatrixXd covariates;  // n_locs x p, p may be 0
  std::vector<std::string> covariate_names;
  std::vector<std::vector<Observation>> steps;  // steps[n - 1]

  long N() const { return static_cast<long>(steps.size()); }
  std::size_t count() const;
  std::size_t n_covariates() const { return static_cast<std::size_t>(covariates.cols()); }

  /// Throws std::invalid_argument for non-finite values, bad station indices,
  /// stations outside dom or a covariate matrix of the wrong shape.
  void validate(const RectangleDomain& dom) const;

  /// Keeps only the listed stations (renumbered in the given order).
  ObservationSet subset(std::span<const std::size_t> stations) const;
};

class FilterError : public std::runtime_error {
 public:
  FilterError(long step, const std::string& what);
  long step() const { return step_; }

 private:
  long step_;
};

/// Sparse observation row h (state index, value).
struct SparseRow {
  std::vector<Eigen::Index> idx;
  std::vector<double> val;
};

struct UpdateResult {
  std::vector<double> yhat;  // h^T m before conditioning on this observation, plus offset
  std::vector<double> a;     // h^T S h + sigma_obs^2
  double loglik = 0.0;
};

/// One step's observations conditioned one scalar at a time. S must be
/// symmetric on entry; it is symmetric on exit. Throws FilterError(step) when
/// an innovation variance is not positive or the covariance loses
/// positive semidefiniteness beyond rounding.
UpdateResult sequential_update(Eigen::VectorXd& m, Eigen::MatrixXd& S,
                               std::span<const SparseRow> rows, std::span<const double> y,
                               std::span<const double> offsets, double sigma_obs2, long step = 0);
/// Dense-row convenience overload (offsets zero).
UpdateResult sequential_update(Eigen::VectorXd& m, Eigen::MatrixXd& S, const Eigen::MatrixXd& H,
                               const Eigen::VectorXd& y, double sigma_obs2, long step = 0);

/// m <- F m and S <- F S F^T + Sigma using the block-diagonal structure.
void predict_step(const BlockStateSpace& ss, Eigen::VectorXd& m, Eigen::MatrixXd& S);
std::pair<Eigen::VectorXd, Eigen::MatrixXd> predict_step(const BlockStateSpace& ss,
                                                         const Eigen::VectorXd& m,
                                                         const Eigen::MatrixXd& S);

/// View of the filter state handed to FilterOptions::on_step after step n.
struct FilterStep {
  long n;
  const Eigen::VectorXd& m_pred;
  const Eigen::MatrixXd& S_pred;
  const Eigen::VectorXd& m_filt;
  const Eigen::MatrixXd& S_filt;
};

struct FilterOptions {
  /// Store covariances every cov_stride steps (0 stores none).
  long cov_stride = 0;
  bool keep_means = true;
  bool keep_predictions = true;
  std::function<void(const FilterStep&)> on_step;
};

struct ObsPrediction {
  long step = 0;
  std::size_t loc = 0;
  double y = 0.0;
  double yhat = 0.0;
  double a = 0.0;
};

struct FilterOutput {
  double loglik = 0.0;
  std::size_t n_obs = 0;
  Eigen::MatrixXd filtered_means;  // b_total x N, column n - 1
  Eigen::MatrixXd forecast_means;  // b_total x N, prior mean of step n
  std::vector<std::pair<long, Eigen::MatrixXd>> filtered_covs;
  std::vector<std::pair<long, Eigen::MatrixXd>> forecast_covs;
  std::vector<ObsPrediction> predictions;
  Eigen::VectorXd final_mean;
  Eigen::MatrixXd final_cov;
};

/// Per-station fixed-effect offsets g_i^T beta with beta = (intercept, covariates...).
/// An empty beta gives zero offsets.
std::vector<double> fixed_effect_offsets(const ObservationSet& obs, std::span<const double> beta);

/// Filter from m_0 = 0, S_0 = S_init over steps 1..obs.N().
FilterOutput run_filter(const BlockStateSpace& ss, const ObservationSet& obs,
                        std::span<const double> beta, double sigma_obs,
                        const FilterOptions& opts = {});

/// Log-likelihood only; no per-step storage.
double filter_loglik(const BlockStateSpace& ss, const ObservationSet& obs,
                     std::span<const double> beta, double sigma_obs);

struct FieldPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

/// Spectral coefficients c_k (first entry of every block).
Eigen::VectorXd coefficient_mean(const BlockStateSpace& ss, const Eigen::VectorXd& m);
Eigen::MatrixXd coefficient_cov(const BlockStateSpace& ss, const Eigen::MatrixXd& S);

/// Mean H c + offsets and variance diag(H S_c H^T) + noise_var for the rows of
/// H (n_locs x M).
FieldPrediction predict_field(const BlockStateSpace& ss, const Eigen::VectorXd& m,
                              const Eigen::MatrixXd& S, const Eigen::MatrixXd& H,
                              std::span<const double> offsets = {}, double noise_var = 0.0);

/// One step ahead from a filtered state: predict_step then predict_field at
/// locs. Adds sigma_obs^2 when include_noise is set.
FieldPrediction forecast(const BlockStateSpace& ss, const Eigen::VectorXd& m_filt,
                         const Eigen::MatrixXd& S_filt, std::span<const Location> locs,
                         std::span<const double> offsets, double sigma_obs, bool include_noise);

/// CSV with header step,x,y,mean,sd,kind.
void write_prediction_csv(std::ostream& os, long step, std::span<const Location> locs,
                          const FieldPrediction& pred, const std::string& kind, bool header);

}  // namespace stmatern
