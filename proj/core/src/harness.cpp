#include "stmatern/harness.hpp"

#include "stmatern/arma.hpp"
#include "stmatern/covariance.hpp"
#include "stmatern/parallel.hpp"
#include "stmatern/rational.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace stmatern {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Exact temporal covariances, M x (max_lag + 1).
Eigen::MatrixXd exact_lags(const FrequencySpectrum& spec, double dt, long max_lag) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(spec.size()), max_lag + 1);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    for (long l = 0; l <= max_lag; ++l) {
      out(static_cast<Eigen::Index>(k), l) =
          temporal_cov(spec.mus[k], spec.lambdas[k], spec.gamma, static_cast<double>(l) * dt);
    }
  }
  return out;
}

/// C_{c_k}(0) times the ARMA autocorrelation, M x (max_lag + 1).
Eigen::MatrixXd arma_lags(const FrequencySpectrum& spec, double dt, long max_lag,
                          const std::shared_ptr<const RationalApprox>& ra) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(spec.size()), max_lag + 1);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const ArmaCoeffs ac = arma_coefficients(spec.mus[k], spec.gamma, dt, ra);
    const auto acf = arma_acf(ac, static_cast<std::size_t>(max_lag));
    const double v0 = marginal_var(spec, k);
    for (long l = 0; l <= max_lag; ++l) out(static_cast<Eigen::Index>(k), l) = v0 * acf[static_cast<std::size_t>(l)];
  }
  return out;
}

double sup_over_grid(const Eigen::MatrixXd& H, const Eigen::MatrixXd& diff) {
  double sup = 0.0;
  for (Eigen::Index l = 0; l < diff.cols(); ++l) {
    const Eigen::MatrixXd E = H * diff.col(l).asDiagonal() * H.transpose();
    sup = std::max(sup, E.cwiseAbs().maxCoeff());
  }
  return sup;
}

std::shared_ptr<const RationalApprox> rational_for(double gamma, int m) {
  const GammaSplit gs = split_gamma(gamma);
  return gs.integer() ? nullptr : cached_rational(gs.eta, m);
}

NaturalParams with_sep(const NaturalValues& base, double beta_s, double sigma_obs) {
  NaturalValues v = base;
  v.beta_sep = beta_s;
  v.sigma_obs = sigma_obs;
  return NaturalParams(v);
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::uint64_t job_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix(splitmix(splitmix(splitmix(seed) ^ a) ^ b) ^ c);
}

std::vector<double> VerifyConfig::default_sweep(double step) {
  if (!(step > 0.0)) throw std::invalid_argument("default_sweep: step must be positive");
  std::vector<double> out;
  const long n = std::lround((3.0 - 0.3) / step);
  for (long i = 0; i <= n; ++i) out.push_back(std::round((0.3 + static_cast<double>(i) * step) * 1e9) / 1e9);
  return out;
}

std::vector<VerifyCase> VerifyConfig::default_cases() {
  return {{"rt1_bs0.25", 1.0, 0.25}, {"rt1_bs0.5", 1.0, 0.5}, {"rt3_bs0.25", 3.0, 0.25}, {"rt3_bs0.5", 3.0, 0.5}};
}

long VerifyConfig::max_lag(const VerifyCase& c) const {
  return static_cast<long>(std::ceil(c.r_t / dt - 1e-9));
}

double covariance_sup_error(const NaturalParams& p, const SpectralBasis& b, double dt, int grid_n,
                            int m, long max_lag) {
  if (!(dt > 0.0) || max_lag < 0) throw std::invalid_argument("covariance_sup_error: bad lag grid");
  const SpdeParams sp = normalize(to_spde(p, b.domain().dim), b);
  const FrequencySpectrum spec = frequency_coeffs(sp, b);
  const auto grid = score_grid(b.domain(), grid_n);
  const Eigen::MatrixXd H = design_matrix(b, grid);
  const Eigen::MatrixXd diff =
      exact_lags(spec, dt, max_lag) - arma_lags(spec, dt, max_lag, rational_for(sp.gamma, m));
  return sup_over_grid(H, diff);
}

std::vector<VerifyRow> verify_covariance(const VerifyConfig& cfg, unsigned threads) {
  const SpectralBasis b = build_basis(cfg.dom, cfg.M);
  const auto grid = score_grid(cfg.dom, cfg.grid_n);
  const Eigen::MatrixXd H = design_matrix(b, grid);

  const std::size_t n_points = cfg.cases.size() * cfg.nu_t.size();
  std::vector<VerifyRow> rows(n_points * cfg.ms.size());
  parallel_for(
      n_points,
      [&](std::size_t job) {
        const VerifyCase& c = cfg.cases[job / cfg.nu_t.size()];
        const double nu_t = cfg.nu_t[job % cfg.nu_t.size()];
        NaturalValues v;
        v.nu_s = cfg.nu_s;
        v.nu_t = nu_t;
        v.r_s = cfg.r_s;
        v.r_t = c.r_t;
        v.beta_sep = c.beta_s;
        v.sigma = cfg.sigma;
        const SpdeParams sp = normalize(to_spde(NaturalParams(v), cfg.dom.dim), b);
        const FrequencySpectrum spec = frequency_coeffs(sp, b);
        const long L = cfg.max_lag(c);
        const Eigen::MatrixXd exact = exact_lags(spec, cfg.dt, L);
        for (std::size_t i = 0; i < cfg.ms.size(); ++i) {
          const Eigen::MatrixXd approx = arma_lags(spec, cfg.dt, L, rational_for(sp.gamma, cfg.ms[i]));
          VerifyRow& row = rows[job * cfg.ms.size() + i];
          row = {c.label, c.r_t, c.beta_s, nu_t, cfg.ms[i], sp.gamma, sup_over_grid(H, exact - approx)};
        }
      },
      threads);
  return rows;
}

void write_verify_csv(std::ostream& os, const std::vector<VerifyRow>& rows) {
  os << "case,r_t,beta_s,nu_t,m,gamma,sup_error\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.label << ',' << r.r_t << ',' << r.beta_s << ',' << r.nu_t << ',' << r.m << ',' << r.gamma
       << ',' << r.sup_error << '\n';
  }
}

RateResult spatial_rate_check(const RateConfig& cfg) {
  if (cfg.Ms.size() < 2) throw std::invalid_argument("spatial_rate_check: need at least two M values");
  const std::size_t K = cfg.reference_terms;
  if (*std::max_element(cfg.Ms.begin(), cfg.Ms.end()) >= K) {
    throw std::invalid_argument("spatial_rate_check: reference_terms must exceed every M");
  }
  const SpectralBasis ref = build_basis(cfg.dom, K);
  SpdeParams sp = to_spde(cfg.params, cfg.dom.dim);
  sp.C = 1.0;
  const FrequencySpectrum spec = frequency_coeffs(sp, ref);
  std::vector<double> v(K);
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    v[k] = marginal_var(spec, k);
    total += v[k];
  }
  // Normalised with the reference sum so the ladder measures truncation only.
  const double scale = cfg.params.sigma() * cfg.params.sigma() * cfg.dom.measure() / total;
  for (double& x : v) x *= scale;

  std::vector<std::size_t> order(cfg.Ms.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cfg.Ms[a] > cfg.Ms[b]; });

  RateResult res;
  res.Ms = cfg.Ms;
  res.errors.assign(cfg.Ms.size(), 0.0);
  for (const Location& s : score_grid(cfg.dom, cfg.grid_n)) {
    double tail = 0.0;
    std::size_t next = 0;
    for (std::size_t k = K; k-- > 0 && next < order.size();) {
      const double f = ref.value(k, s);
      tail += v[k] * f * f;
      while (next < order.size() && cfg.Ms[order[next]] == k) {
        res.errors[order[next]] = std::max(res.errors[order[next]], tail);
        ++next;
      }
    }
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(cfg.Ms.size());
  for (std::size_t i = 0; i < cfg.Ms.size(); ++i) {
    const double x = std::log(static_cast<double>(cfg.Ms[i]));
    const double y = std::log(res.errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  res.expected_slope = -2.0 * cfg.params.nu_s() / cfg.dom.dim;
  return res;
}

void write_rate_csv(std::ostream& os, const RateResult& r) {
  os << "M,error\n";
  os.precision(17);
  for (std::size_t i = 0; i < r.Ms.size(); ++i) os << r.Ms[i] << ',' << r.errors[i] << '\n';
  os << "slope," << r.slope << '\n';
}

SyntheticData simulate_dataset(const NaturalParams& truth, const RectangleDomain& dom, std::size_t M,
                               const TimeGrid& grid, std::size_t n_locs, double loc_low,
                               double loc_high, std::uint64_t seed) {
  if (!(loc_low < loc_high)) throw std::invalid_argument("simulate_dataset: empty location box");
  SpectralBasis basis = build_basis(dom, M);
  const SpdeParams sp = normalize(to_spde(truth, dom.dim), basis);
  Eigen::MatrixXd coeffs = simulate_exact(sp, basis, grid, job_seed(seed, 0));

  std::mt19937_64 rng(job_seed(seed, 1));
  std::uniform_real_distribution<double> unif(loc_low, loc_high);
  std::normal_distribution<double> noise(0.0, truth.sigma_obs());
  ObservationSet obs;
  obs.locations.resize(n_locs);
  for (auto& s : obs.locations) {
    s[0] = unif(rng);
    s[1] = dom.dim == 2 ? unif(rng) : 0.0;
  }
  for (auto& s : obs.locations) {
    if (!dom.contains(s)) throw std::invalid_argument("simulate_dataset: location box leaves the domain");
  }
  obs.covariates.resize(static_cast<Eigen::Index>(n_locs), 0);
  const Eigen::MatrixXd field = field_at(coeffs.rightCols(grid.N), basis, obs.locations);
  obs.steps.resize(static_cast<std::size_t>(grid.N));
  for (long n = 0; n < grid.N; ++n) {
    auto& step = obs.steps[static_cast<std::size_t>(n)];
    step.reserve(n_locs);
    for (std::size_t i = 0; i < n_locs; ++i) {
      step.push_back({i, field(static_cast<Eigen::Index>(i), n) + noise(rng)});
    }
  }
  return {std::move(basis), std::move(coeffs), std::move(obs)};
}

std::vector<Scenario> SimStudyConfig::default_scenarios() {
  return {{"LL", 0.25, 0.35}, {"LH", 0.25, 0.75}, {"HL", 0.75, 0.35}, {"HH", 0.75, 0.75}};
}

CoefficientPredictions predict_coefficients(const BlockStateSpace& ss, const ObservationSet& obs,
                                            std::span<const double> beta, double sigma_obs) {
  CoefficientPredictions out;
  const auto M = static_cast<Eigen::Index>(ss.M());
  out.filter_mean.resize(M, obs.N());
  out.forecast_mean.resize(M, obs.N());
  FilterOptions opts;
  opts.keep_means = false;
  opts.keep_predictions = false;
  opts.on_step = [&](const FilterStep& st) {
    out.filter_mean.col(st.n - 1) = coefficient_mean(ss, st.m_filt);
    out.forecast_mean.col(st.n - 1) = coefficient_mean(ss, st.m_pred);
    out.filter_cov.push_back(coefficient_cov(ss, st.S_filt));
    out.forecast_cov.push_back(coefficient_cov(ss, st.S_pred));
  };
  run_filter(ss, obs, beta, sigma_obs, opts);
  return out;
}

SimStudyResult simstudy(const SimStudyConfig& cfg, std::uint64_t seed, unsigned threads,
                        const std::function<void(const ReplicateResult&)>& on_done) {
  if (cfg.replicates < 1) throw std::invalid_argument("simstudy: replicates must be positive");
  if (cfg.M_inf > cfg.M_sim) throw std::invalid_argument("simstudy: M_inf must not exceed M_sim");
  const TimeGrid grid{cfg.dt, cfg.N};
  grid.validate();
  const SpectralBasis basis_inf = build_basis(cfg.dom, cfg.M_inf);
  const auto R = static_cast<std::size_t>(cfg.replicates);
  const std::size_t n_models = cfg.models.size();

  SimStudyResult res;
  res.rows.resize(cfg.scenarios.size() * R * n_models);
  std::mutex done_mutex;
  parallel_for(
      cfg.scenarios.size() * R,
      [&](std::size_t job) {
        const std::size_t si = job / R;
        const std::size_t r = job % R;
        const Scenario& sc = cfg.scenarios[si];
        ReplicateResult base;
        base.scenario = sc.label;
        base.replicate = static_cast<int>(r) + 1;

        std::optional<SyntheticData> train;
        std::optional<SyntheticData> test;
        std::string data_error;
        try {
          const NaturalParams truth = with_sep(cfg.truth, sc.beta_s, sc.sigma_obs);
          train = simulate_dataset(truth, cfg.dom, cfg.M_sim, grid, cfg.n_locs, cfg.loc_low, cfg.loc_high,
                                   job_seed(seed, si, r, 0));
          test = simulate_dataset(truth, cfg.dom, cfg.M_sim, grid, cfg.n_locs, cfg.loc_low, cfg.loc_high,
                                  job_seed(seed, si, r, 1));
        } catch (const std::exception& e) {
          data_error = std::string("simulation failed: ") + e.what();
        }

        for (std::size_t mi = 0; mi < n_models; ++mi) {
          ReplicateResult row = base;
          row.model = cfg.models[mi];
          const auto t0 = std::chrono::steady_clock::now();
          if (!data_error.empty()) {
            row.error = data_error;
          } else {
            try {
              NaturalValues init = default_init(train->obs, cfg.dom, grid).values();
              if (row.model == ModelKind::Simple) init.nu_s = cfg.simple_nu_s;
              FitConfig fc{row.model, cfg.m, cfg.optimizer};
              row.fit = fit_mle(train->obs, basis_inf, grid, NaturalParams(init), fc);
              const BlockStateSpace ss = build_model(row.fit.theta_hat, basis_inf, cfg.m, grid);
              const auto pred = predict_coefficients(ss, test->obs, {}, row.fit.theta_hat.sigma_obs());
              const Eigen::MatrixXd truth = test->coeffs.rightCols(cfg.N);
              row.filter = score_predictions(truth, test->basis, pred.filter_mean, pred.filter_cov, basis_inf,
                                             cfg.grid_n);
              row.forecast = score_predictions(truth, test->basis, pred.forecast_mean, pred.forecast_cov,
                                               basis_inf, cfg.grid_n);
              row.ok = true;
            } catch (const std::exception& e) {
              row.error = e.what();
            }
          }
          row.seconds = elapsed(t0);
          res.rows[job * n_models + mi] = row;
          if (on_done) {
            std::lock_guard<std::mutex> lock(done_mutex);
            on_done(row);
          }
        }
      },
      threads);
  res.failures = static_cast<std::size_t>(
      std::count_if(res.rows.begin(), res.rows.end(), [](const ReplicateResult& r) { return !r.ok; }));
  return res;
}

void write_simstudy_estimates_csv(std::ostream& os, const SimStudyConfig& cfg, const SimStudyResult& r) {
  os << "scenario,replicate,model,param,estimate,truth\n";
  os.precision(17);
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    const auto sc = std::find_if(cfg.scenarios.begin(), cfg.scenarios.end(),
                                 [&](const Scenario& s) { return s.label == row.scenario; });
    NaturalValues truth = cfg.truth;
    if (sc != cfg.scenarios.end()) {
      truth.beta_sep = sc->beta_s;
      truth.sigma_obs = sc->sigma_obs;
    }
    const auto mask = free_mask(row.model);
    for (std::size_t i = 0; i < kNumOptCoords; ++i) {
      if (!mask[i]) continue;
      const auto c = static_cast<OptCoord>(i);
      os << row.scenario << ',' << row.replicate << ',' << to_string(row.model) << ',' << kParamNames[i] << ','
         << natural_value(row.fit.theta_hat.values(), c) << ',' << natural_value(truth, c) << '\n';
    }
  }
}

void write_simstudy_scores_csv(std::ostream& os, const SimStudyResult& r) {
  os << "scenario,replicate,model,kind,rmse,crps\n";
  os.precision(17);
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    const std::string head = row.scenario + ',' + std::to_string(row.replicate) + ',' + to_string(row.model);
    os << head << ",filter," << row.filter.rmse << ',' << row.filter.crps << '\n';
    os << head << ",forecast," << row.forecast.rmse << ',' << row.forecast.crps << '\n';
  }
}

std::vector<int> assign_folds(std::span<const Location> locs, const RectangleDomain& dom, int n_folds,
                              double block_size, StripeAxis axis) {
  if (n_folds < 1) throw std::invalid_argument("assign_folds: need at least one fold");
  if (!(block_size > 0.0)) throw std::invalid_argument("assign_folds: block_size must be positive");
  const int a = (axis == StripeAxis::Y && dom.dim == 2) ? 1 : 0;
  std::vector<int> folds(locs.size());
  for (std::size_t i = 0; i < locs.size(); ++i) {
    const double u = std::clamp((locs[i][a] - dom.origin[a]) / block_size, 0.0, dom.lengths[a] / block_size);
    const long stripe = std::min(static_cast<long>(std::floor(u)),
                                 std::max(0L, static_cast<long>(std::ceil(dom.lengths[a] / block_size)) - 1));
    folds[i] = static_cast<int>(stripe % n_folds);
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_folds), 0);
  for (int f : folds) ++counts[static_cast<std::size_t>(f)];
  for (int f = 0; f < n_folds; ++f) {
    if (counts[static_cast<std::size_t>(f)] == 0) {
      throw std::invalid_argument("assign_folds: fold " + std::to_string(f + 1) + " has no stations");
    }
  }
  return folds;
}

StationScores score_stations(const BlockStateSpace& ss, const ObservationSet& train,
                             const ObservationSet& test, std::span<const double> beta, double sigma_obs) {
  if (train.N() != test.N()) throw std::invalid_argument("score_stations: train and test step counts differ");
  const Eigen::MatrixXd H_all = design_matrix(ss.basis, test.locations);
  const std::vector<double> off_all = fixed_effect_offsets(test, beta);
  const double noise = sigma_obs * sigma_obs;

  StationScores sc;
  double se_filter = 0.0, se_forecast = 0.0, crps_filter = 0.0, crps_forecast = 0.0;
  FilterOptions opts;
  opts.keep_means = false;
  opts.keep_predictions = false;
  opts.on_step = [&](const FilterStep& st) {
    const auto& rows = test.steps[static_cast<std::size_t>(st.n - 1)];
    if (rows.empty()) return;
    Eigen::MatrixXd H(static_cast<Eigen::Index>(rows.size()), H_all.cols());
    std::vector<double> off(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      H.row(static_cast<Eigen::Index>(i)) = H_all.row(static_cast<Eigen::Index>(rows[i].loc));
      off[i] = off_all[rows[i].loc];
    }
    const FieldPrediction pf = predict_field(ss, st.m_filt, st.S_filt, H, off, noise);
    const FieldPrediction pp = predict_field(ss, st.m_pred, st.S_pred, H, off, noise);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double y = rows[i].value;
      se_filter += (y - pf.mean[r]) * (y - pf.mean[r]);
      se_forecast += (y - pp.mean[r]) * (y - pp.mean[r]);
      crps_filter += crps_gaussian(y, pf.mean[r], std::sqrt(pf.var[r]));
      crps_forecast += crps_gaussian(y, pp.mean[r], std::sqrt(pp.var[r]));
    }
    sc.n += rows.size();
  };
  run_filter(ss, train, beta, sigma_obs, opts);
  if (sc.n == 0) throw std::invalid_argument("score_stations: test set has no observations");
  const double n = static_cast<double>(sc.n);
  sc.filter = {std::sqrt(se_filter / n), crps_filter / n};
  sc.forecast = {std::sqrt(se_forecast / n), crps_forecast / n};
  return sc;
}

Scores combine_fold_scores(const std::vector<Scores>& folds) {
  if (folds.empty()) throw std::invalid_argument("combine_fold_scores: no folds");
  Scores out;
  for (const auto& f : folds) {
    out.rmse += f.rmse * f.rmse;
    out.crps += f.crps;
  }
  out.rmse = std::sqrt(out.rmse / static_cast<double>(folds.size()));
  out.crps /= static_cast<double>(folds.size());
  return out;
}

CvResult block_cv(const ObservationSet& obs, const RectangleDomain& dom, const TimeGrid& grid,
                  const CvConfig& cfg, unsigned threads) {
  obs.validate(dom);
  if (obs.N() != grid.N) throw std::invalid_argument("block_cv: observation steps do not match the time grid");
  CvResult res;
  res.folds = assign_folds(obs.locations, dom, cfg.n_folds, cfg.block_size, cfg.axis);
  const SpectralBasis basis = build_basis(dom, cfg.M);
  const auto K = static_cast<std::size_t>(cfg.n_folds);
  const std::size_t n_models = cfg.models.size();
  res.rows.resize(K * n_models);

  parallel_for(
      K * n_models,
      [&](std::size_t job) {
        const int fold = static_cast<int>(job / n_models);
        const ModelKind kind = cfg.models[job % n_models];
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < obs.locations.size(); ++i) {
          if (K == 1 || res.folds[i] != fold) train_idx.push_back(i);
          if (K == 1 || res.folds[i] == fold) test_idx.push_back(i);
        }
        const ObservationSet train = obs.subset(train_idx);
        const ObservationSet test = obs.subset(test_idx);

        NaturalValues init = cfg.init ? cfg.init->values()
                                      : default_init(ols_fixed_effects(train).residuals, dom, grid).values();
        if (kind == ModelKind::Simple) init.nu_s = cfg.simple_nu_s;
        FoldResult& row = res.rows[job];
        row.fold = fold + 1;
        row.model = kind;
        row.n_train = train.count();
        row.n_test = test.count();
        row.fit = fit_two_step(train, basis, grid, NaturalParams(init), FitConfig{kind, cfg.m, cfg.optimizer});
        const BlockStateSpace ss = build_model(row.fit.theta_hat, basis, cfg.m, grid);
        row.scores = score_stations(ss, train, test, row.fit.beta_hat, row.fit.theta_hat.sigma_obs());
      },
      threads);

  for (ModelKind kind : cfg.models) {
    std::vector<Scores> f, p;
    for (const auto& row : res.rows) {
      if (row.model != kind) continue;
      f.push_back(row.scores.filter);
      p.push_back(row.scores.forecast);
    }
    res.summary.push_back({kind, combine_fold_scores(f), combine_fold_scores(p)});
  }
  return res;
}

void write_cv_csv(std::ostream& os, const CvResult& r) {
  os << "fold,model,n_train,n_test,loglik";
  for (auto name : kParamNames) os << ',' << name;
  os << ",filter_rmse,filter_crps,forecast_rmse,forecast_crps\n";
  os.precision(17);
  for (const auto& row : r.rows) {
    os << row.fold << ',' << to_string(row.model) << ',' << row.n_train << ',' << row.n_test << ','
       << row.fit.loglik;
    for (std::size_t i = 0; i < kNumOptCoords; ++i) {
      os << ',' << natural_value(row.fit.theta_hat.values(), static_cast<OptCoord>(i));
    }
    os << ',' << row.scores.filter.rmse << ',' << row.scores.filter.crps << ',' << row.scores.forecast.rmse
       << ',' << row.scores.forecast.crps << '\n';
  }
  for (const auto& s : r.summary) {
    os << "all," << to_string(s.model) << ",,,";
    for (std::size_t i = 0; i < kNumOptCoords; ++i) os << ',';
    os << ',' << s.filter.rmse << ',' << s.filter.crps << ',' << s.forecast.rmse << ',' << s.forecast.crps << '\n';
  }
}

}  // namespace stmatern
