#include "stmatern/covariance.hpp"
#include "stmatern/kalman.hpp"
#include "stmatern/rational.hpp"
#include "stmatern/spectral.hpp"
#include "stmatern/statespace.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

using namespace stmatern;

NaturalParams bench_params() { return NaturalParams(NaturalValues{1.0, 0.75, 0.5, 5.0, 0.5, 1.0, 0.5}); }

// One predict plus sequential update of n_obs scalar observations.
void BM_KalmanStep(benchmark::State& state) {
  const auto M = static_cast<std::size_t>(state.range(0));
  const std::size_t n_obs = 100;
  const TimeGrid grid{1.0, 1};
  const BlockStateSpace ss = build_model(bench_params(), build_basis(RectangleDomain::rectangle(1.0, 1.0), M), 1, grid);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Location> locs(n_obs);
  for (auto& s : locs) s = {u(rng), u(rng)};
  std::vector<SparseRow> rows(n_obs);
  for (std::size_t i = 0; i < n_obs; ++i) {
    const Eigen::VectorXd f = eval_basis(ss.basis, locs[i]);
    for (std::size_t k = 0; k < M; ++k) {
      rows[i].idx.push_back(ss.offset(k));
      rows[i].val.push_back(f[static_cast<Eigen::Index>(k)]);
    }
  }
  std::vector<double> y(n_obs, 0.5);
  const Eigen::MatrixXd S0 = ss.dense_S_init();

  for (auto _ : state) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(ss.b_total());
    Eigen::MatrixXd S = S0;
    predict_step(ss, m, S);
    auto res = sequential_update(m, S, rows, y, {}, 0.25);
    benchmark::DoNotOptimize(res.loglik);
  }
  state.counters["state_dim"] = static_cast<double>(ss.b_total());
}
BENCHMARK(BM_KalmanStep)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TemporalCov(benchmark::State& state) {
  const double gamma = static_cast<double>(state.range(0)) / 100.0;
  double h = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(temporal_cov(1.0, 1.0, gamma, h));
    h = h > 5.0 ? 0.0 : h + 0.01;
  }
}
BENCHMARK(BM_TemporalCov)->Arg(100)->Arg(125)->Arg(175)->Arg(260);

void BM_FitRational(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_rational(0.37, m).grid_error);
}
BENCHMARK(BM_FitRational)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_BuildModel(benchmark::State& state) {
  const auto M = static_cast<std::size_t>(state.range(0));
  const SpectralBasis b = build_basis(RectangleDomain::rectangle(1.0, 1.0), M);
  cached_rational(0.25, 1);
  for (auto _ : state) benchmark::DoNotOptimize(build_model(bench_params(), b, 1, TimeGrid{1.0, 45}).b_total());
}
BENCHMARK(BM_BuildModel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
