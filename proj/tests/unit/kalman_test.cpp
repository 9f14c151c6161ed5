#include "stmatern/kalman.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace stmatern {
namespace {

NaturalParams natural(double nu_t, double nu_s, double beta_s, double r_t, double r_s, double sigma,
                      double sigma_obs) {
  NaturalValues v;
  v.nu_t = nu_t;
  v.nu_s = nu_s;
  v.beta_sep = beta_s;
  v.r_t = r_t;
  v.r_s = r_s;
  v.sigma = sigma;
  v.sigma_obs = sigma_obs;
  return NaturalParams(v);
}

ObservationSet random_observations(const SpectralBasis& b, std::size_t n_locs, long N, double keep,
                                   unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, b.domain().lengths[0]);
  std::uniform_real_distribution<double> uy(0.0, b.domain().lengths[1]);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> nd;
  ObservationSet obs;
  obs.locations.resize(n_locs);
  for (auto& s : obs.locations) s = {ux(rng), b.domain().dim == 2 ? uy(rng) : 0.0};
  obs.covariates.resize(static_cast<Eigen::Index>(n_locs), 0);
  obs.steps.resize(static_cast<std::size_t>(N));
  for (auto& step : obs.steps) {
    for (std::size_t i = 0; i < n_locs; ++i) {
      if (u01(rng) < keep) step.push_back({i, nd(rng)});
    }
  }
  return obs;
}

// Dense-joint oracle for a filter run: per-step design rows from eval_basis
// placed on the first entry of each block.
double dense_loglik(const BlockStateSpace& ss, const ObservationSet& obs, double sigma_obs) {
  std::vector<Eigen::MatrixXd> H;
  std::vector<Eigen::VectorXd> y;
  for (const auto& step : obs.steps) {
    Eigen::MatrixXd Hn = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(step.size()), ss.b_total());
    Eigen::VectorXd yn(static_cast<Eigen::Index>(step.size()));
    for (std::size_t j = 0; j < step.size(); ++j) {
      const Eigen::VectorXd f = eval_basis(ss.basis, obs.locations[step[j].loc]);
      for (std::size_t k = 0; k < ss.M(); ++k) {
        Hn(static_cast<Eigen::Index>(j), ss.offset(k)) = f[static_cast<Eigen::Index>(k)];
      }
      yn[static_cast<Eigen::Index>(j)] = step[j].value;
    }
    H.push_back(Hn);
    y.push_back(yn);
  }
  return testing::dense_state_space_loglik(ss.dense_F(), ss.dense_Sigma(), ss.dense_S_init(), H, y,
                                           sigma_obs * sigma_obs);
}

TEST(SequentialUpdate, EqualsJointUpdateOnRandomModels) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 * (1 + trial % 3);
    const int n_obs = 1 + trial % 6;
    const Eigen::MatrixXd S0 = testing::random_spd(n, 500 + static_cast<unsigned>(trial));
    Eigen::VectorXd m0(n), y(n_obs);
    for (auto& v : m0) v = nd(rng);
    for (auto& v : y) v = nd(rng);
    Eigen::MatrixXd H(n_obs, n);
    for (int i = 0; i < n_obs; ++i) {
      for (int j = 0; j < n; ++j) H(i, j) = (trial % 2 == 0 && j % 3 != 0) ? 0.0 : nd(rng);
    }
    const double s2 = 0.05 + 0.1 * trial;
    const auto oracle = testing::joint_update(m0, S0, H, y, s2);
    Eigen::VectorXd m = m0;
    Eigen::MatrixXd S = S0;
    const UpdateResult res = sequential_update(m, S, H, y, s2);
    EXPECT_LT((m - oracle.m).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((S - oracle.S).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(res.loglik, oracle.loglik, 1e-10 * std::max(1.0, std::abs(oracle.loglik)));
    EXPECT_EQ(S, S.transpose());
    for (double a : res.a) EXPECT_GE(a, s2);
  }
}

TEST(SequentialUpdate, SparseRowsMatchDenseRows) {
  const Eigen::MatrixXd S0 = testing::random_spd(9, 3);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, 9);
  H(0, 0) = 0.7;
  H(0, 3) = -0.2;
  H(1, 6) = 1.1;
  H(2, 0) = 0.3;
  H(2, 6) = 0.4;
  const Eigen::VectorXd y = Eigen::Vector3d(0.5, -1.0, 2.0);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(9), m2 = m1;
  Eigen::MatrixXd S1 = S0, S2 = S0;
  sequential_update(m1, S1, H, y, 0.3);
  std::vector<SparseRow> rows(3);
  rows[0] = {{3, 0}, {-0.2, 0.7}};
  rows[1] = {{6}, {1.1}};
  rows[2] = {{0, 6}, {0.3, 0.4}};
  const std::vector<double> ys{0.5, -1.0, 2.0};
  const std::vector<double> offsets{0.0, 0.0, 0.0};
  sequential_update(m2, S2, rows, ys, offsets, 0.3);
  EXPECT_LT((m1 - m2).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((S1 - S2).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SequentialUpdate, UninformativeAndExactLimits) {
  const Eigen::MatrixXd S0 = testing::random_spd(3, 1);
  const Eigen::MatrixXd H = Eigen::RowVector3d(1.0, 0.5, -0.3);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 1.7);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd S = S0;
  sequential_update(m, S, H, y, 1e12 * S0.trace());
  EXPECT_LT((S - S0).cwiseAbs().maxCoeff(), 1e-4 * S0.cwiseAbs().maxCoeff());
  EXPECT_LT(m.cwiseAbs().maxCoeff(), 1e-4);

  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd S1 = Eigen::MatrixXd::Constant(1, 1, 2.0);
  sequential_update(m1, S1, Eigen::MatrixXd::Ones(1, 1), y, 1e-12);
  EXPECT_NEAR(m1[0], 1.7, 1e-9);
  EXPECT_LT(S1(0, 0), 1e-11);
}

TEST(SequentialUpdate, LossOfPositivityIsAnError) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(2, 2);
  S(1, 1) = -5.0;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(2);
  const Eigen::MatrixXd H = Eigen::RowVector2d(0.0, 1.0);
  try {
    sequential_update(m, S, H, Eigen::VectorXd::Ones(1), 0.1, 12);
    FAIL() << "expected FilterError";
  } catch (const FilterError& e) {
    EXPECT_EQ(e.step(), 12);
  }
}

TEST(PredictStep, StationaryFixedPointAndScalarRecursion) {
  const auto b = build_basis(RectangleDomain::rectangle(1.0, 1.0), 5);
  const TimeGrid grid{0.2, 5};
  const auto ss = build_model(natural(1.3, 1.0, 0.4, 1.0, 0.5, 1.0, 0.1), b, 2, grid);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(ss.b_total());
  Eigen::MatrixXd S = ss.dense_S_init();
  const Eigen::MatrixXd S0 = S;
  for (int i = 0; i < 5; ++i) predict_step(ss, m, S);
  EXPECT_LT((S - S0).cwiseAbs().maxCoeff(), 1e-8 * S0.cwiseAbs().maxCoeff());
  EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0);

  const Eigen::MatrixXd P = testing::random_spd(static_cast<int>(ss.b_total()), 4);
  const auto [m2, S2] = predict_step(ss, Eigen::VectorXd::Ones(ss.b_total()), P);
  const Eigen::MatrixXd F = ss.dense_F();
  EXPECT_LT((S2 - (F * P * F.transpose() + ss.dense_Sigma())).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((m2 - F * Eigen::VectorXd::Ones(ss.b_total())).cwiseAbs().maxCoeff(), 1e-14);

  const auto ar = build_model(natural(0.5, 1.0, 0.0, 1.0, 0.5, 1.0, 0.1), build_basis(b.domain(), 1), 1, grid);
  Eigen::VectorXd ma = Eigen::VectorXd::Constant(1, 2.0);
  Eigen::MatrixXd Sa = Eigen::MatrixXd::Constant(1, 1, 0.3);
  predict_step(ar, ma, Sa);
  const double phi = ar.blocks[0].F(0, 0);
  EXPECT_NEAR(Sa(0, 0), phi * phi * 0.3 + ar.blocks[0].sigma2, 1e-15);
  EXPECT_NEAR(ma[0], 2.0 * phi, 1e-15);
}

TEST(RunFilter, MatchesDenseJointDensityOnTinyModel) {
  const auto b = build_basis(RectangleDomain::rectangle(1.0, 1.0), 2);
  const TimeGrid grid{0.5, 3};
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto ss = build_model(natural(0.5, 1.0, 0.0, 1.2, 0.4, 1.3, 0.4), b, 1, grid);
    ASSERT_EQ(ss.block_size, 1);
    const auto obs = random_observations(b, 2, 3, 1.0, 10 + seed);
    const double ll = filter_loglik(ss, obs, {}, 0.4);
    EXPECT_NEAR(ll, dense_loglik(ss, obs, 0.4), 1e-8);
  }
}

TEST(RunFilter, MatchesDenseJointDensityWithArmaBlocksAndGaps) {
  const auto b = build_basis(RectangleDomain::rectangle(1.2, 0.8), 4);
  const TimeGrid grid{0.3, 5};
  const auto ss = build_model(natural(1.4, 1.1, 0.5, 1.0, 0.5, 1.0, 0.3), b, 2, grid);
  ASSERT_GT(ss.block_size, 1);
  const auto obs = random_observations(b, 4, 5, 0.6, 3);
  EXPECT_NEAR(filter_loglik(ss, obs, {}, 0.3), dense_loglik(ss, obs, 0.3), 1e-8);
}

TEST(RunFilter, WithinStepOrderDoesNotMatter) {
  const auto b = build_basis(RectangleDomain::rectangle(1.0, 1.0), 16);
  const TimeGrid grid{1.0, 6};
  const auto ss = build_model(natural(1.0, 1.0, 0.5, 4.0, 0.5, 2.0, 0.5), b, 1, grid);
  auto obs = random_observations(b, 12, 6, 0.8, 8);
  const double ll = filter_loglik(ss, obs, {}, 0.5);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    for (auto& step : obs.steps) std::shuffle(step.begin(), step.end(), rng);
    EXPECT_LT(std::abs(filter_loglik(ss, obs, {}, 0.5) - ll), 1e-9);
  }
}

TEST(RunFilter, EmptyDataAndStoredOutputs) {
  const auto b = build_basis(RectangleDomain::rectangle(1.0, 1.0), 4);
  const TimeGrid grid{0.5, 4};
  const auto ss = build_model(natural(1.2, 1.0, 0.3, 1.0, 0.5, 1.0, 0.2), b, 1, grid);
  auto empty = random_observations(b, 3, 4, 0.0, 2);
  FilterOptions opts;
  opts.cov_stride = 1;
  const auto out = run_filter(ss, empty, {}, 0.2, opts);
  EXPECT_EQ(out.loglik, 0.0);
  EXPECT_EQ(out.n_obs, 0u);
  EXPECT_EQ(out.filtered_means.cwiseAbs().maxCoeff(), 0.0);
  ASSERT_EQ(out.filtered_covs.size(), 4u);
  const Eigen::MatrixXd S0 = ss.dense_S_init();
  EXPECT_LT((out.filtered_covs.back().second - S0).cwiseAbs().maxCoeff(), 1e-8 * S0.maxCoeff());

  const auto obs = random_observations(b, 3, 4, 1.0, 2);
  const auto full = run_filter(ss, obs, {}, 0.2, opts);
  EXPECT_EQ(full.n_obs, 12u);
  EXPECT_EQ(full.predictions.size(), 12u);
  for (const auto& p : full.predictions) EXPECT_GE(p.a, 0.04);
  ASSERT_EQ(full.forecast_covs.size(), 4u);
  for (std::size_t n = 0; n < 4; ++n) {
    EXPECT_LE(full.filtered_covs[n].second.trace(), full.forecast_covs[n].second.trace());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(full.filtered_covs[n].second);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(RunFilter, OffsetsShiftPredictions) {
  const auto b = build_basis(RectangleDomain::rectangle(1.0, 1.0), 4);
  const TimeGrid grid{0.5, 3};
  const auto ss = build_model(natural(1.2, 1.0, 0.3, 1.0, 0.5, 1.0, 0.2), b, 1, grid);
  auto obs = random_observations(b, 3, 3, 1.0, 6);
  obs.covariates.resize(3, 1);
  obs.covariates << 1.0, 2.0, -1.0;
  obs.covariate_names = {"cov_a"};
  const std::vector<double> beta{5.0, 0.5};
  const auto offsets = fixed_effect_offsets(obs, beta);
  ASSERT_EQ(offsets.size(), 3u);
  EXPECT_DOUBLE_EQ(offsets[1], 6.0);
  auto shifted = obs;
  for (auto& step : shifted.steps) {
    for (auto& o : step) o.value += offsets[o.loc];
  }
  EXPECT_NEAR(filter_loglik(ss, shifted, beta, 0.2), filter_loglik(ss, obs, {}, 0.2), 1e-10);
}

TEST(Forecast, PriorVarianceAndNoiseFlag) {
  const auto b = build_basis(RectangleDomain::rectangle(1.0, 1.0), 9);
  const TimeGrid grid{0.5, 3};
  const auto ss = build_model(natural(1.2, 1.0, 0.3, 1.0, 0.5, 1.0, 0.3), b, 1, grid);
  const Eigen::VectorXd m0 = Eigen::VectorXd::Zero(ss.b_total());
  const Eigen::MatrixXd S0 = ss.dense_S_init();
  const std::vector<Location> locs{{0.2, 0.3}, {0.8, 0.9}};
  const auto signal = forecast(ss, m0, S0, locs, {}, 0.3, false);
  const auto noisy = forecast(ss, m0, S0, locs, {}, 0.3, true);
  for (std::size_t i = 0; i < locs.size(); ++i) {
    const Eigen::VectorXd f = eval_basis(b, locs[i]);
    double stationary = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      stationary += marginal_var(ss.spectrum, k) * f[static_cast<Eigen::Index>(k)] * f[static_cast<Eigen::Index>(k)];
    }
    const auto ii = static_cast<Eigen::Index>(i);
    EXPECT_NEAR(signal.var[ii], stationary, 1e-8 * stationary);
    EXPECT_NEAR(noisy.var[ii] - signal.var[ii], 0.09, 1e-12);
    EXPECT_EQ(signal.mean[ii], 0.0);
  }
}

TEST(Forecast, AutoregressiveMeanIsDecayedFilteredMean) {
  const auto b = build_basis(RectangleDomain::rectangle(1.0, 1.0), 1);
  const TimeGrid grid{0.5, 3};
  const auto ss = build_model(natural(0.5, 1.0, 0.0, 1.0, 0.5, 1.0, 0.3), b, 1, grid);
  const Eigen::VectorXd m = Eigen::VectorXd::Constant(1, 1.5);
  const Eigen::MatrixXd S = Eigen::MatrixXd::Constant(1, 1, 0.2);
  const std::vector<Location> locs{{0.5, 0.5}};
  const auto fc = forecast(ss, m, S, locs, {}, 0.3, false);
  EXPECT_NEAR(fc.mean[0], ss.blocks[0].F(0, 0) * 1.5 * eval_basis(b, locs[0])[0], 1e-15);
  const auto zero = forecast(ss, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1), locs, {}, 0.3, false);
  EXPECT_EQ(zero.mean[0], 0.0);
}

TEST(RunFilter, TrueParametersBeatInflatedSigmaOnAverage) {
  const auto dom = RectangleDomain::rectangle(1.0, 1.0);
  const auto b = build_basis(dom, 16);
  const TimeGrid grid{1.0, 20};
  const auto truth = natural(1.0, 1.0, 0.25, 5.0, 0.5, 2.0, 0.3);
  const auto ss = build_model(truth, b, 1, grid);
  const auto ss2 = build_model(natural(1.0, 1.0, 0.25, 5.0, 0.5, 4.0, 0.3), b, 1, grid);
  double diff = 0.0;
  for (unsigned r = 0; r < 10; ++r) {
    const Eigen::MatrixXd c = simulate_statespace(ss, grid, 50 + r);
    auto obs = random_observations(b, 20, 20, 1.0, 90 + r);
    std::mt19937_64 rng(r);
    std::normal_distribution<double> nd(0.0, 0.3);
    const Eigen::MatrixXd H = design_matrix(b, obs.locations);
    for (long n = 1; n <= grid.N; ++n) {
      for (auto& o : obs.steps[static_cast<std::size_t>(n - 1)]) {
        o.value = H.row(static_cast<Eigen::Index>(o.loc)).dot(c.col(n)) + nd(rng);
      }
    }
    diff += filter_loglik(ss, obs, {}, 0.3) - filter_loglik(ss2, obs, {}, 0.3);
  }
  EXPECT_GT(diff / 10.0, 0.0);
}

TEST(PredictionCsv, Header) {
  std::ostringstream os;
  FieldPrediction p{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  const std::vector<Location> locs{{0.1, 0.2}};
  write_prediction_csv(os, 3, locs, p, "forecast", true);
  EXPECT_EQ(os.str(), "step,x,y,mean,sd,kind\n3,0.10000000000000001,0.20000000000000001,0,1,forecast\n");
}

}  // namespace
}  // namespace stmatern
