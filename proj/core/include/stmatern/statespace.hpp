#pragma once

#include "stmatern/arma.hpp"
#include "stmatern/covariance.hpp"
#include "stmatern/params.hpp"
#include "stmatern/rational.hpp"
#include "stmatern/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace stmatern {

/// Regular time grid t_n = n dt for n = 0..N.
struct TimeGrid {
  double dt = 1.0;
  long N = 1;

  double T() const { return dt * static_cast<double>(N); }
  /// Throws std::invalid_argument unless dt > 0 and N >= 1.
  void validate() const;
};

/// Block-diagonal state space over M frequencies in basis order. Block k
/// occupies state indices [offset(k), offset(k) + block_size); its first entry
/// is the spectral coefficient c_k.
struct BlockStateSpace {
  std::vector<FrequencyBlock> blocks;
  SpectralBasis basis;
  SpdeParams params;
  FrequencySpectrum spectrum;
  int m = 0;
  int floor_gamma = 1;
  double dt = 1.0;
  int block_size = 1;

  std::size_t M() const { return blocks.size(); }
  Eigen::Index b_total() const { return static_cast<Eigen::Index>(blocks.size()) * block_size; }
  Eigen::Index offset(std::size_t k) const { return static_cast<Eigen::Index>(k) * block_size; }

  /// Dense block-diagonal assemblies, for tests and small models.
  Eigen::MatrixXd dense_F() const;
  Eigen::MatrixXd dense_Sigma() const;
  Eigen::MatrixXd dense_S_init() const;
};

/// Builds every block by arma_coefficients, companion and stationary_init
/// with target C_{c_k}(0). p must carry its normalisation constant. ra may be
/// null for integer gamma. Per-frequency failures surface as FrequencyError.
BlockStateSpace assemble(const SpdeParams& p, const SpectralBasis& b,
                         std::shared_ptr<const RationalApprox> ra, const TimeGrid& grid);

/// to_spde, normalize, the cached rational fit of order m and assemble.
BlockStateSpace build_model(const NaturalParams& p, const SpectralBasis& b, int m,
                            const TimeGrid& grid);

/// Seed of the independent random stream for frequency k.
std::uint64_t frequency_seed(std::uint64_t seed, std::size_t k);

/// Coefficient paths c_k^n, an M x (N + 1) matrix. x^0 ~ N(0, S_init) and
/// x^n = F x^{n-1} + v^n with v^n ~ N(0, Sigma).
Eigen::MatrixXd simulate_statespace(const BlockStateSpace& ss, const TimeGrid& grid,
                                    std::uint64_t seed);

inline constexpr long kMaxExactSteps = 5000;

/// Exact stationary Gaussian draws of (c_k(t_0), ..., c_k(t_N)) from the
/// Toeplitz covariance of temporal_cov; independent across k. N = 0 gives a
/// single stationary draw per frequency. Uses a Cholesky factorisation with
/// diagonal jitter up to 1e-10 of the diagonal.
/// Throws std::invalid_argument when N > kMaxExactSteps and
/// std::runtime_error when the factorisation fails.
Eigen::MatrixXd simulate_exact(const SpdeParams& p, const SpectralBasis& b, const TimeGrid& grid,
                               std::uint64_t seed);

/// Lower Cholesky factor of the stationary covariance of one frequency.
Eigen::MatrixXd exact_cov_factor(double mu, double lambda, double gamma, const TimeGrid& grid);
/// Toeplitz covariance of one frequency's coefficient path.
Eigen::MatrixXd exact_cov(double mu, double lambda, double gamma, const TimeGrid& grid);

/// Field values: design_matrix(b, locs) * coeffs (n_locs x columns).
Eigen::MatrixXd field_at(const Eigen::MatrixXd& coeffs, const SpectralBasis& b,
                         std::span<const Location> locs);

/// CSV with header k,time,value; k is 1-based and time is the step index n.
void write_coeff_paths_csv(std::ostream& os, const Eigen::MatrixXd& coeffs);
/// CSV with header time,x,y,value for columns first_step.. of field; time is
/// the step index, matching the observation file format.
void write_field_csv(std::ostream& os, const Eigen::MatrixXd& field, std::span<const Location> locs,
                     long first_step = 1);

}  // namespace stmatern
