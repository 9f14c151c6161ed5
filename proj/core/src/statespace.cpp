#include "stmatern/statespace.hpp"

#include "stmatern/parallel.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace stmatern {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Symmetric square root factor L with L L^T = S for a PSD S.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

Eigen::MatrixXd block_diag(const BlockStateSpace& ss, auto pick) {
  const Eigen::Index n = ss.b_total();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < ss.M(); ++k) {
    out.block(ss.offset(k), ss.offset(k), ss.block_size, ss.block_size) = pick(ss.blocks[k]);
  }
  return out;
}

}  // namespace

void TimeGrid::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("TimeGrid: dt must be positive");
  if (N < 1) throw std::invalid_argument("TimeGrid: N must be at least 1");
}

Eigen::MatrixXd BlockStateSpace::dense_F() const {
  return block_diag(*this, [](const FrequencyBlock& b) { return b.F; });
}
Eigen::MatrixXd BlockStateSpace::dense_Sigma() const {
  return block_diag(*this, [](const FrequencyBlock& b) { return b.Sigma; });
}
Eigen::MatrixXd BlockStateSpace::dense_S_init() const {
  return block_diag(*this, [](const FrequencyBlock& b) { return b.S_stat; });
}

BlockStateSpace assemble(const SpdeParams& p, const SpectralBasis& b,
                         std::shared_ptr<const RationalApprox> ra, const TimeGrid& grid) {
  grid.validate();
  check_existence(p, b.domain().dim);
  const GammaSplit gs = split_gamma(p.gamma);
  BlockStateSpace ss{.blocks = {}, .basis = b, .params = p, .spectrum = frequency_coeffs(p, b)};
  ss.floor_gamma = gs.floor;
  ss.m = gs.integer() ? 0 : (ra ? ra->m : 0);
  ss.dt = grid.dt;
  ss.block_size = std::max(ss.m + gs.floor, 1) + ss.m;

  const double r_t = temporal_range(p);
  ss.blocks.resize(b.size());
  parallel_for(b.size(), [&](std::size_t k) {
    const double target = marginal_var(ss.spectrum, k);
    ss.blocks[k] = build_frequency_block(ss.spectrum.mus[k], p.gamma, grid.dt, ra, target, r_t, k);
  });
  return ss;
}

BlockStateSpace build_model(const NaturalParams& p, const SpectralBasis& b, int m,
                            const TimeGrid& grid) {
  const SpdeParams sp = normalize(to_spde(p, b.domain().dim), b);
  const GammaSplit gs = split_gamma(sp.gamma);
  std::shared_ptr<const RationalApprox> ra;
  if (!gs.integer()) ra = cached_rational(gs.eta, m);
  return assemble(sp, b, std::move(ra), grid);
}

std::uint64_t frequency_seed(std::uint64_t seed, std::size_t k) {
  return splitmix64(splitmix64(seed) ^ splitmix64(0x5bd1e995ULL + k));
}

Eigen::MatrixXd simulate_statespace(const BlockStateSpace& ss, const TimeGrid& grid,
                                    std::uint64_t seed) {
  grid.validate();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ss.M()), grid.N + 1);
  parallel_for(ss.M(), [&](std::size_t k) {
    const auto& fb = ss.blocks[k];
    std::mt19937_64 rng(frequency_seed(seed, k));
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index b = fb.size();
    Eigen::VectorXd z(b);
    for (Eigen::Index i = 0; i < b; ++i) z[i] = normal(rng);
    Eigen::VectorXd x = psd_factor(fb.S_stat) * z;
    const double sd = std::sqrt(fb.sigma2);
    const auto row = static_cast<Eigen::Index>(k);
    out(row, 0) = x[0];
    Eigen::VectorXd next(b);
    for (long n = 1; n <= grid.N; ++n) {
      next.noalias() = fb.F * x;
      const double eps = sd * normal(rng);
      next[0] += eps;
      if (fb.m > 0) next[fb.n_ar] += eps;
      x.swap(next);
      out(row, n) = x[0];
    }
  });
  return out;
}

Eigen::MatrixXd exact_cov(double mu, double lambda, double gamma, const TimeGrid& grid) {
  const Eigen::Index n = grid.N + 1;
  Eigen::VectorXd lag(n);
  for (Eigen::Index h = 0; h < n; ++h) lag[h] = temporal_cov(mu, lambda, gamma, grid.dt * h);
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) C(i, j) = lag[std::abs(i - j)];
  }
  return C;
}

Eigen::MatrixXd exact_cov_factor(double mu, double lambda, double gamma, const TimeGrid& grid) {
  Eigen::MatrixXd C = exact_cov(mu, lambda, gamma, grid);
  const double d0 = C(0, 0);
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  double jitter = 1e-16 * d0;
  while (llt.info() != Eigen::Success) {
    if (jitter > 1e-10 * d0) {
      throw std::runtime_error("simulate_exact: covariance factorisation failed after maximal jitter");
    }
    Eigen::MatrixXd Cj = C;
    Cj.diagonal().array() += jitter;
    llt.compute(Cj);
    jitter *= 10.0;
  }
  return llt.matrixL();
}

Eigen::MatrixXd simulate_exact(const SpdeParams& p, const SpectralBasis& b, const TimeGrid& grid,
                               std::uint64_t seed) {
  // N = 0 is a single stationary draw.
  if (grid.N != 0) grid.validate();
  if (!(grid.dt > 0.0)) throw std::invalid_argument("simulate_exact: dt must be positive");
  if (grid.N > kMaxExactSteps) throw std::invalid_argument("simulate_exact: N exceeds 5000");
  const FrequencySpectrum spec = frequency_coeffs(p, b);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(b.size()), grid.N + 1);
  parallel_for(b.size(), [&](std::size_t k) {
    const Eigen::MatrixXd L = exact_cov_factor(spec.mus[k], spec.lambdas[k], spec.gamma, grid);
    std::mt19937_64 rng(frequency_seed(seed, k));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(grid.N + 1);
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    out.row(static_cast<Eigen::Index>(k)) = (L * z).transpose();
  });
  return out;
}

Eigen::MatrixXd field_at(const Eigen::MatrixXd& coeffs, const SpectralBasis& b,
                         std::span<const Location> locs) {
  if (coeffs.rows() != static_cast<Eigen::Index>(b.size())) {
    throw std::invalid_argument("field_at: coefficient rows must equal basis size");
  }
  return design_matrix(b, locs) * coeffs;
}

void write_coeff_paths_csv(std::ostream& os, const Eigen::MatrixXd& coeffs) {
  os << "k,time,value\n";
  os.precision(17);
  for (Eigen::Index k = 0; k < coeffs.rows(); ++k) {
    for (Eigen::Index n = 0; n < coeffs.cols(); ++n) {
      os << k + 1 << ',' << n << ',' << coeffs(k, n) << '\n';
    }
  }
}

void write_field_csv(std::ostream& os, const Eigen::MatrixXd& field, std::span<const Location> locs,
                     long first_step) {
  os << "time,x,y,value\n";
  os.precision(17);
  for (Eigen::Index n = first_step; n < field.cols(); ++n) {
    for (std::size_t i = 0; i < locs.size(); ++i) {
      os << n << ',' << locs[i][0] << ',' << locs[i][1] << ',' << field(static_cast<Eigen::Index>(i), n)
         << '\n';
    }
  }
}

}  // namespace stmatern
