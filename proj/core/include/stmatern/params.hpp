#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace stmatern {

/// Raw field values of the interpretable parameterisation. Carries no
/// invariants on its own; wrap it in NaturalParams to validate.
struct NaturalValues {
  double nu_s = 1.0;       // spatial smoothness
  double nu_t = 1.0;       // temporal smoothness
  double r_s = 1.0;        // spatial range
  double r_t = 1.0;        // temporal range
  double beta_sep = 0.0;   // non-separability in [0, 1]
  double sigma = 1.0;      // marginal standard deviation
  double sigma_obs = 1.0;  // measurement error standard deviation

  bool operator==(const NaturalValues&) const = default;
};

/// Interpretable parameters, validated against the optimiser box:
///   nu_s > 0.25, 0.25 < nu_t < 3.25, r_s, r_t, sigma > 0.005,
///   beta_sep in [0, 1], sigma_obs > 0.
/// Throws std::invalid_argument on construction when a bound is violated.
class NaturalParams {
 public:
  explicit NaturalParams(const NaturalValues& v);

  double nu_s() const { return v_.nu_s; }
  double nu_t() const { return v_.nu_t; }
  double r_s() const { return v_.r_s; }
  double r_t() const { return v_.r_t; }
  double beta_sep() const { return v_.beta_sep; }
  double sigma() const { return v_.sigma; }
  double sigma_obs() const { return v_.sigma_obs; }

  const NaturalValues& values() const { return v_; }

  bool operator==(const NaturalParams&) const = default;

 private:
  NaturalValues v_;
};

/// SPDE-side parameters: temporal order gamma, spatial power alpha inside the
/// time operator, noise colouring beta, inverse range kappa, temporal scale r
/// and normalisation C. sigma and sigma_obs are carried through unchanged.
struct SpdeParams {
  double gamma = 1.0;
  double alpha = 0.0;
  double beta = 1.0;
  double kappa = 1.0;
  double r = 1.0;
  double C = 1.0;
  double sigma = 1.0;
  double sigma_obs = 1.0;
};

/// gamma > 1/2 and beta + alpha (2 gamma - 1) > d/2.
bool satisfies_existence(const SpdeParams& p, int dim);
/// Throws std::invalid_argument naming the violated condition.
void check_existence(const SpdeParams& p, int dim);

/// Maps interpretable parameters to SPDE parameters. The returned C is 1;
/// the bounded-domain constant is set by covariance::normalize().
SpdeParams to_spde(const NaturalParams& p, int dim);
NaturalParams to_natural(const SpdeParams& p, int dim);

/// Temporal range implied by SPDE parameters (independent of dim).
double temporal_range(const SpdeParams& p);

// Optimiser-space transform. Coordinate order:
//   nu_t, nu_s, beta_sep, r_t, r_s, sigma, sigma_obs.
enum class OptCoord : std::size_t {
  NuT = 0,
  NuS = 1,
  BetaSep = 2,
  RT = 3,
  RS = 4,
  Sigma = 5,
  SigmaObs = 6,
};
inline constexpr std::size_t kNumOptCoords = 7;
inline constexpr std::array<std::string_view, kNumOptCoords> kParamNames = {
    "nu_t", "nu_s", "beta_s", "r_t", "r_s", "sigma", "sigma_obs"};

struct OptVector {
  std::array<double, kNumOptCoords> v{};

  double& operator[](OptCoord c) { return v[static_cast<std::size_t>(c)]; }
  double operator[](OptCoord c) const { return v[static_cast<std::size_t>(c)]; }
};

/// Value of the natural parameter behind coordinate c.
double natural_value(const NaturalValues& v, OptCoord c);
void set_natural_value(NaturalValues& v, OptCoord c, double value);

/// One coordinate of the transform. Throws std::domain_error at or beyond
/// the box boundary.
double to_opt_coord(OptCoord c, double value);
/// Inverse of to_opt_coord; every finite real lands strictly inside the box.
double from_opt_coord(OptCoord c, double x);

OptVector to_opt(const NaturalParams& p);
NaturalParams from_opt(const OptVector& v);

}  // namespace stmatern
