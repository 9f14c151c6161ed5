#include "stmatern/params.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace stmatern {
namespace {

NaturalValues values(double nu_t, double nu_s, double beta_s, double r_t, double r_s,
                     double sigma = 1.0, double sigma_obs = 1.0) {
  NaturalValues v;
  v.nu_t = nu_t;
  v.nu_s = nu_s;
  v.beta_sep = beta_s;
  v.r_t = r_t;
  v.r_s = r_s;
  v.sigma = sigma;
  v.sigma_obs = sigma_obs;
  return v;
}

NaturalValues random_values(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return values(0.3 + 2.9 * u(rng), 0.3 + 2.7 * u(rng), u(rng), 0.01 + 20.0 * u(rng),
                0.01 + 5.0 * u(rng), 0.01 + 5.0 * u(rng), 0.01 + 2.0 * u(rng));
}

void expect_rel_near(double actual, double expected, double rel) {
  EXPECT_NEAR(actual, expected, rel * std::max(1.0, std::abs(expected))) << "expected " << expected;
}

TEST(ToSpde, SimulationStudyTruthWithQuarterNonSeparability) {
  const NaturalParams p(values(1.0, 1.0, 0.25, 10.0, 1.0));
  const SpdeParams s = to_spde(p, 2);
  EXPECT_NEAR(s.gamma, 1.5, 1e-15);
  EXPECT_NEAR(s.alpha, 0.25, 1e-15);
  EXPECT_NEAR(s.beta, 1.5, 1e-15);
  EXPECT_NEAR(s.kappa, std::sqrt(8.0), 1e-15);
  EXPECT_NEAR(s.r, 10.0 * std::pow(8.0, -0.25), 1e-13);
  EXPECT_NEAR(s.r, 5.9460, 5e-5);
  EXPECT_EQ(s.C, 1.0);
}

TEST(ToSpde, SeparableLimitHasNoSpatialPowerInTime) {
  const NaturalParams p(values(1.0, 1.0, 0.0, 10.0, 1.0));
  const SpdeParams s = to_spde(p, 2);
  EXPECT_EQ(s.alpha, 0.0);
  EXPECT_NEAR(s.beta, 1.0 / 0.5, 1e-15);
  EXPECT_NEAR(s.gamma, 1.5, 1e-15);
}

TEST(ToNatural, InvertsWorkedExample) {
  SpdeParams s;
  s.gamma = 1.5;
  s.alpha = 0.25;
  s.beta = 1.5;
  s.kappa = std::sqrt(8.0);
  s.r = 10.0 * std::pow(8.0, -0.25);
  s.sigma = 3.5;
  s.sigma_obs = 0.35;
  const NaturalParams p = to_natural(s, 2);
  EXPECT_NEAR(p.nu_s(), 1.0, 1e-13);
  EXPECT_NEAR(p.nu_t(), 1.0, 1e-13);
  EXPECT_NEAR(p.beta_sep(), 0.25, 1e-13);
  EXPECT_NEAR(p.r_s(), 1.0, 1e-13);
  EXPECT_NEAR(p.r_t(), 10.0, 1e-12);
  EXPECT_EQ(p.sigma(), 3.5);
  EXPECT_EQ(p.sigma_obs(), 0.35);
}

TEST(ToNatural, RoundTripOnRandomDraws) {
  std::mt19937_64 rng(7);
  for (int dim = 1; dim <= 2; ++dim) {
    for (int i = 0; i < 100; ++i) {
      const NaturalParams p(random_values(rng));
      const NaturalParams back = to_natural(to_spde(p, dim), dim);
      expect_rel_near(back.nu_t(), p.nu_t(), 1e-12);
      expect_rel_near(back.nu_s(), p.nu_s(), 1e-12);
      expect_rel_near(back.beta_sep(), p.beta_sep(), 1e-12);
      expect_rel_near(back.r_t(), p.r_t(), 1e-12);
      expect_rel_near(back.r_s(), p.r_s(), 1e-12);
      EXPECT_EQ(back.sigma(), p.sigma());
      EXPECT_EQ(back.sigma_obs(), p.sigma_obs());
    }
  }
}

TEST(ToSpde, NonSeparabilityShareIncreasesWithBetaS) {
  auto share = [](double beta_s) {
    const SpdeParams s = to_spde(NaturalParams(values(1.2, 0.8, beta_s, 3.0, 0.5)), 2);
    const double smooth = (2.0 * s.gamma - 1.0) * s.alpha;
    return smooth / (s.beta + smooth);
  };
  double prev = share(0.0);
  EXPECT_EQ(prev, 0.0);
  for (double b = 0.05; b <= 1.0 + 1e-12; b += 0.05) {
    const double cur = share(std::min(b, 1.0));
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

TEST(Existence, RejectsViolatingSpdeParams) {
  SpdeParams s;
  s.gamma = 1.0;
  s.alpha = 0.0;
  s.beta = 0.9;  // beta + alpha (2 gamma - 1) = 0.9 < d / 2 = 1
  EXPECT_FALSE(satisfies_existence(s, 2));
  EXPECT_THROW(check_existence(s, 2), std::invalid_argument);
  EXPECT_TRUE(satisfies_existence(s, 1));
  s.gamma = 0.5;
  EXPECT_THROW(check_existence(s, 1), std::invalid_argument);
  EXPECT_THROW(to_natural(s, 1), std::invalid_argument);
}

TEST(Existence, HoldsAcrossValidBox) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const NaturalParams p(random_values(rng));
    for (int dim = 1; dim <= 2; ++dim) EXPECT_TRUE(satisfies_existence(to_spde(p, dim), dim));
  }
}

TEST(NaturalParams, RejectsOutOfBoxValues) {
  EXPECT_THROW(NaturalParams(values(0.25, 1, 0.5, 1, 1)), std::invalid_argument);
  EXPECT_THROW(NaturalParams(values(3.25, 1, 0.5, 1, 1)), std::invalid_argument);
  EXPECT_THROW(NaturalParams(values(1, 0.2, 0.5, 1, 1)), std::invalid_argument);
  EXPECT_THROW(NaturalParams(values(1, 1, -0.1, 1, 1)), std::invalid_argument);
  EXPECT_THROW(NaturalParams(values(1, 1, 1.1, 1, 1)), std::invalid_argument);
  EXPECT_THROW(NaturalParams(values(1, 1, 0.5, 0.005, 1)), std::invalid_argument);
  EXPECT_THROW(NaturalParams(values(1, 1, 0.5, 1, 0.004)), std::invalid_argument);
  EXPECT_THROW(NaturalParams(values(1, 1, 0.5, 1, 1, 0.005)), std::invalid_argument);
  EXPECT_THROW(NaturalParams(values(1, 1, 0.5, 1, 1, 1, 0.0)), std::invalid_argument);
  EXPECT_THROW(NaturalParams(values(1, 1, 0.5, NAN, 1)), std::invalid_argument);
  EXPECT_THROW(to_spde(NaturalParams(values(1, 1, 0.5, 1, 1)), 3), std::invalid_argument);
}

TEST(OptTransform, WorkedCoordinates) {
  EXPECT_NEAR(to_opt_coord(OptCoord::NuT, 1.75), std::log(1.2), 1e-15);
  EXPECT_NEAR(to_opt_coord(OptCoord::NuT, 1.75), 0.18232, 1e-5);
  EXPECT_NEAR(to_opt_coord(OptCoord::BetaSep, 0.5), std::log(2.0) / 3.0, 1e-15);
  EXPECT_NEAR(to_opt_coord(OptCoord::BetaSep, 0.5), 0.23105, 1e-5);
  EXPECT_EQ(to_opt_coord(OptCoord::SigmaObs, 1.0), 0.0);
  EXPECT_NEAR(to_opt_coord(OptCoord::NuS, 1.25), 0.0, 1e-15);
  EXPECT_NEAR(to_opt_coord(OptCoord::RT, 1.005), 0.0, 1e-15);
}

TEST(OptTransform, RoundTripOnRandomDraws) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    NaturalValues v = random_values(rng);
    v.beta_sep = 0.01 + 0.98 * v.beta_sep;
    const NaturalParams p(v);
    const NaturalParams back = from_opt(to_opt(p));
    for (std::size_t c = 0; c < kNumOptCoords; ++c) {
      const auto oc = static_cast<OptCoord>(c);
      expect_rel_near(natural_value(back.values(), oc), natural_value(p.values(), oc), 1e-12);
    }
  }
}

TEST(OptTransform, FromOptStaysInsideBoxForExtremeInputs) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-800.0, 800.0);
  for (int i = 0; i < 200; ++i) {
    OptVector v;
    for (auto& x : v.v) x = u(rng);
    if (i == 0) v.v.fill(-1e6);
    if (i == 1) v.v.fill(1e6);
    EXPECT_NO_THROW({
      const NaturalParams p = from_opt(v);
      EXPECT_GT(p.nu_t(), 0.25);
      EXPECT_LT(p.nu_t(), 3.25);
      EXPECT_GE(p.beta_sep(), 0.0);
      EXPECT_LE(p.beta_sep(), 1.0);
      EXPECT_GT(p.sigma_obs(), 0.0);
    });
  }
}

TEST(OptTransform, RejectsBoundaryValues) {
  EXPECT_THROW(to_opt_coord(OptCoord::NuT, 0.25), std::domain_error);
  EXPECT_THROW(to_opt_coord(OptCoord::NuT, 3.25), std::domain_error);
  EXPECT_THROW(to_opt_coord(OptCoord::BetaSep, 0.0), std::domain_error);
  EXPECT_THROW(to_opt_coord(OptCoord::BetaSep, 1.0), std::domain_error);
  EXPECT_THROW(to_opt_coord(OptCoord::RS, 0.005), std::domain_error);
  EXPECT_THROW(to_opt_coord(OptCoord::SigmaObs, 0.0), std::domain_error);
  EXPECT_THROW(to_opt_coord(OptCoord::NuS, INFINITY), std::domain_error);
  EXPECT_THROW(from_opt_coord(OptCoord::NuS, NAN), std::domain_error);
}

}  // namespace
}  // namespace stmatern
