#include "stmatern/inference.hpp"

#include "stmatern/covariance.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace stmatern {

OlsResult ols_fixed_effects(const ObservationSet& obs) {
  const std::size_t p = obs.n_covariates();
  const auto cols = static_cast<Eigen::Index>(p + 1);
  const auto rows = static_cast<Eigen::Index>(obs.count());
  if (rows == 0) throw std::invalid_argument("ols_fixed_effects: no observations");

  OlsResult res;
  res.names.push_back("intercept");
  res.names.insert(res.names.end(), obs.covariate_names.begin(), obs.covariate_names.end());

  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd y(rows);
  Eigen::Index r = 0;
  for (const auto& step : obs.steps) {
    for (const auto& o : step) {
      X(r, 0) = 1.0;
      if (p > 0) X.row(r).tail(cols - 1) = obs.covariates.row(static_cast<Eigen::Index>(o.loc));
      y[r] = o.value;
      ++r;
    }
  }

  // Column scaling keeps the rank decision independent of covariate units.
  const Eigen::VectorXd scale = X.colwise().norm().transpose().cwiseMax(1e-300);
  const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) {
    std::ostringstream os;
    os << "ols_fixed_effects: design matrix is rank deficient; dependent columns:";
    const auto perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < cols; ++j) os << ' ' << res.names[static_cast<std::size_t>(perm[j])];
    throw std::invalid_argument(os.str());
  }
  const Eigen::VectorXd beta = qr.solve(y).cwiseQuotient(scale);
  res.beta.assign(beta.data(), beta.data() + beta.size());

  res.residuals = obs;
  const std::vector<double> off = fixed_effect_offsets(obs, res.beta);
  for (auto& step : res.residuals.steps) {
    for (auto& o : step) o.value -= off[o.loc];
  }
  return res;
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "full" || s == "Full") return ModelKind::Full;
  if (s == "simple" || s == "Simple") return ModelKind::Simple;
  throw std::invalid_argument("unknown model kind '" + s + "' (expected full or simple)");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Full ? "Full" : "Simple"; }

std::array<bool, kNumOptCoords> free_mask(ModelKind kind) {
  std::array<bool, kNumOptCoords> mask{};
  mask.fill(true);
  if (kind == ModelKind::Simple) {
    mask[static_cast<std::size_t>(OptCoord::NuT)] = false;
    mask[static_cast<std::size_t>(OptCoord::NuS)] = false;
    mask[static_cast<std::size_t>(OptCoord::BetaSep)] = false;
  }
  return mask;
}

NaturalParams initial_params(ModelKind kind, const NaturalParams& init) {
  if (kind == ModelKind::Full) return init;
  NaturalValues v = init.values();
  v.nu_t = 0.5;
  v.beta_sep = 0.0;
  return NaturalParams(v);
}

double model_loglik(const NaturalParams& p, const SpectralBasis& b, const TimeGrid& grid, int m,
                    const ObservationSet& residuals) {
  const BlockStateSpace ss = build_model(p, b, m, grid);
  return filter_loglik(ss, residuals, {}, p.sigma_obs());
}

FitResult fit_mle(const ObservationSet& residuals, const SpectralBasis& b, const TimeGrid& grid,
                  const NaturalParams& init, const FitConfig& cfg) {
  const NaturalParams start = initial_params(cfg.kind, init);
  const auto mask = free_mask(cfg.kind);
  std::vector<OptCoord> free;
  for (std::size_t i = 0; i < kNumOptCoords; ++i) {
    if (mask[i]) free.push_back(static_cast<OptCoord>(i));
  }

  Eigen::VectorXd x0(static_cast<Eigen::Index>(free.size()));
  for (std::size_t i = 0; i < free.size(); ++i) {
    x0[static_cast<Eigen::Index>(i)] = to_opt_coord(free[i], natural_value(start.values(), free[i]));
  }
  auto to_params = [&](const Eigen::VectorXd& x) {
    NaturalValues v = start.values();
    for (std::size_t i = 0; i < free.size(); ++i) {
      set_natural_value(v, free[i], from_opt_coord(free[i], x[static_cast<Eigen::Index>(i)]));
    }
    return NaturalParams(v);
  };
  auto objective = [&](const Eigen::VectorXd& x) {
    try {
      const double ll = model_loglik(to_params(x), b, grid, cfg.m, residuals);
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  FitResult fr;
  fr.theta_hat = start;
  const double f0 = objective(x0);
  if (!std::isfinite(f0)) throw std::runtime_error("fit_mle: log-likelihood not finite at the initial parameters");
  fr.loglik_init = -f0;

  const LbfgsResult opt = minimize_lbfgs(objective, x0, cfg.optimizer);
  fr.theta_hat = to_params(opt.x);
  fr.loglik = -opt.f;
  fr.iterations = opt.iterations;
  fr.evaluations = opt.evaluations + 1;
  fr.converged = opt.converged;
  fr.message = opt.message;
  fr.trace.reserve(opt.trace.size());
  for (double f : opt.trace) fr.trace.push_back(-f);
  return fr;
}

NaturalParams default_init(const ObservationSet& residuals, const RectangleDomain& dom,
                           const TimeGrid& grid) {
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t n = 0;
  for (const auto& step : residuals.steps) {
    for (const auto& o : step) {
      sum += o.value;
      sum2 += o.value * o.value;
      ++n;
    }
  }
  if (n < 2) throw std::invalid_argument("default_init: need at least two observations");
  const double mean = sum / static_cast<double>(n);
  const double sd = std::sqrt(std::max(sum2 / static_cast<double>(n) - mean * mean, 0.0));
  if (!(sd > 0.0)) throw std::invalid_argument("default_init: residuals have zero variance");
  NaturalValues v;
  v.nu_t = 1.25;
  v.nu_s = 1.25;
  v.beta_sep = 0.5;
  v.r_t = 5.0 * grid.dt;
  v.r_s = 0.5 * (dom.dim == 2 ? std::max(dom.lengths[0], dom.lengths[1]) : dom.lengths[0]);
  v.sigma = std::max(sd, 0.01);
  v.sigma_obs = 0.3 * sd;
  return NaturalParams(v);
}

FitResult fit_two_step(const ObservationSet& obs, const SpectralBasis& b, const TimeGrid& grid,
                       const NaturalParams& init, const FitConfig& cfg,
                       std::vector<std::string>* beta_names) {
  const OlsResult ols = ols_fixed_effects(obs);
  FitResult fr = fit_mle(ols.residuals, b, grid, init, cfg);
  fr.beta_hat = ols.beta;
  if (beta_names != nullptr) *beta_names = ols.names;
  return fr;
}

double crps_gaussian(double y, double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("crps_gaussian: sd must be positive");
  const double z = (y - mean) / sd;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return sd * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::sqrt(std::numbers::pi));
}

double coefficient_rmse(const Eigen::MatrixXd& truth, const SpectralBasis& truth_basis,
                        const Eigen::MatrixXd& pred, const SpectralBasis& pred_basis) {
  if (truth.rows() != static_cast<Eigen::Index>(truth_basis.size()) ||
      pred.rows() != static_cast<Eigen::Index>(pred_basis.size()) || truth.cols() != pred.cols()) {
    throw std::invalid_argument("coefficient_rmse: dimension mismatch");
  }
  if (pred_basis.size() > truth_basis.size()) {
    throw std::invalid_argument("coefficient_rmse: prediction basis larger than truth basis");
  }
  Eigen::MatrixXd diff = truth;
  for (std::size_t k = 0; k < pred_basis.size(); ++k) {
    const std::size_t t = truth_basis.index_of(pred_basis.freqs()[k]);
    if (t == truth_basis.size()) throw std::invalid_argument("coefficient_rmse: frequency missing from truth basis");
    diff.row(static_cast<Eigen::Index>(t)) -= pred.row(static_cast<Eigen::Index>(k));
  }
  if (diff.cols() == 0) return 0.0;
  return std::sqrt(diff.squaredNorm() / static_cast<double>(diff.cols()));
}

double mean_crps(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& mean, const Eigen::MatrixXd& var) {
  if (truth.rows() != mean.rows() || truth.cols() != mean.cols() || var.rows() != mean.rows() ||
      var.cols() != mean.cols()) {
    throw std::invalid_argument("mean_crps: dimension mismatch");
  }
  if (truth.size() == 0) return 0.0;
  double s = 0.0;
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      s += crps_gaussian(truth(i, j), mean(i, j), std::sqrt(var(i, j)));
    }
  }
  return s / static_cast<double>(truth.size());
}

std::vector<Location> score_grid(const RectangleDomain& dom, int n) {
  if (n < 2) throw std::invalid_argument("score_grid: need at least 2 nodes per side");
  std::vector<Location> g;
  const int ny = dom.dim == 2 ? n : 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < n; ++i) {
      Location s{dom.origin[0] + dom.lengths[0] * i / (n - 1), 0.0};
      if (dom.dim == 2) s[1] = dom.origin[1] + dom.lengths[1] * j / (n - 1);
      g.push_back(s);
    }
  }
  return g;
}

Scores score_predictions(const Eigen::MatrixXd& truth, const SpectralBasis& truth_basis,
                         const Eigen::MatrixXd& pred, const std::vector<Eigen::MatrixXd>& pred_cov,
                         const SpectralBasis& pred_basis, int grid_n) {
  if (pred_cov.size() != static_cast<std::size_t>(pred.cols())) {
    throw std::invalid_argument("score_predictions: one covariance per step required");
  }
  Scores sc;
  sc.rmse = coefficient_rmse(truth, truth_basis, pred, pred_basis);
  const auto grid = score_grid(truth_basis.domain(), grid_n);
  const Eigen::MatrixXd Ht = design_matrix(truth_basis, grid);
  const Eigen::MatrixXd Hp = design_matrix(pred_basis, grid);
  const Eigen::MatrixXd u_true = Ht * truth;
  const Eigen::MatrixXd u_mean = Hp * pred;
  Eigen::MatrixXd u_var(u_mean.rows(), u_mean.cols());
  for (Eigen::Index n = 0; n < pred.cols(); ++n) {
    const auto& C = pred_cov[static_cast<std::size_t>(n)];
    u_var.col(n) = (Hp * C).cwiseProduct(Hp).rowwise().sum().cwiseMax(1e-300);
  }
  sc.crps = mean_crps(u_true, u_mean, u_var);
  return sc;
}

}  // namespace stmatern
