#include "stmatern/rational.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace stmatern {
namespace {

using cd = std::complex<double>;

// Durand-Kerner iteration on the monic normalisation of an ascending polynomial.
std::vector<cd> durand_kerner(std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  const std::size_t n = c.size() - 1;
  std::vector<cd> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(cd(0.4, 0.9), static_cast<double>(i)) * 2.0;
  auto eval = [&](cd x) {
    cd v = c.back();
    for (std::size_t i = n; i-- > 0;) v = v * x + c[i];
    return v / c.back();
  };
  for (int it = 0; it < 2000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      cd den = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) den *= z[i] - z[j];
      }
      z[i] -= eval(z[i]) / den;
    }
  }
  return z;
}

TEST(FitRational, ZeroExponentIsIdentity) {
  for (int m = 0; m <= 3; ++m) {
    const auto ra = fit_rational(0.0, m);
    std::vector<double> one(static_cast<std::size_t>(m) + 1, 0.0);
    one[0] = 1.0;
    EXPECT_EQ(ra.p, one);
    EXPECT_EQ(ra.q, one);
    EXPECT_EQ(ra.grid_error, 0.0);
    EXPECT_EQ(disc_error(ra, 64), 0.0);
    EXPECT_EQ(std::abs(frac_power(cd(0.0, 1.0), 0.0) - eval_rational(ra, cd(0.0, 1.0))), 0.0);
  }
}

TEST(FitRational, HalfPowerOrderTwoAccuracy) {
  const auto ra = fit_rational(0.5, 2);
  EXPECT_LT(ra.grid_error, 0.01);
  EXPECT_NEAR(grid_error(ra), ra.grid_error, 1e-15);
  EXPECT_EQ(ra.q[0], 1.0);
  EXPECT_NE(ra.p[0], 0.0);
}

TEST(FitRational, HigherOrderNeverWorseOnSweep) {
  for (int i = 1; i < 20; ++i) {
    const double eta = 0.05 * i;
    const auto r1 = cached_rational(eta, 1);
    const auto r3 = cached_rational(eta, 3);
    EXPECT_LE(r3->grid_error, r1->grid_error) << "eta " << eta;
  }
}

TEST(FitRational, RootsStayOutsideClosedDisc) {
  for (double eta : {0.1, 0.25, 0.5, 0.75, 0.95}) {
    for (int m = 1; m <= 3; ++m) {
      const auto ra = cached_rational(eta, m);
      for (const cd z : durand_kerner(ra->q)) EXPECT_GT(std::abs(z), 1.0) << eta << " " << m;
      for (const cd z : durand_kerner(ra->p)) EXPECT_GT(std::abs(z), 1.0) << eta << " " << m;
      EXPECT_TRUE(std::isfinite(disc_error(*ra, 128)));
      EXPECT_GT(min_root_separation(*ra), 1e-8);
    }
  }
}

TEST(FitRational, RootFinderAgreesWithIndependentIteration) {
  const auto ra = fit_rational(0.5, 3);
  const auto roots = poly_roots(ra.q);
  const auto oracle = durand_kerner(ra.q);
  ASSERT_EQ(roots.size(), oracle.size());
  for (const cd r : roots) {
    double best = INFINITY;
    for (const cd o : oracle) best = std::min(best, std::abs(r - o));
    EXPECT_LT(best, 1e-8 * std::max(1.0, std::abs(r)));
  }
}

TEST(FitRational, ConjugateSymmetryAndGridResiduals) {
  const auto ra = fit_rational(0.37, 2);
  for (const cd z : {cd(0.3, 0.4), cd(-0.7, 0.1), cd(0.0, -1.0)}) {
    const cd a = eval_rational(ra, std::conj(z));
    const cd b = std::conj(eval_rational(ra, z));
    EXPECT_EQ(a.real(), b.real());
    EXPECT_EQ(a.imag(), b.imag());
  }
  double worst = 0.0;
  for (int i = 0; i < kRationalGridSize; ++i) {
    const double x = i / static_cast<double>(kRationalGridSize - 1);
    worst = std::max(worst, std::abs(std::pow(1.0 - x, 0.37) - eval_rational(ra, cd(x, 0.0)).real()));
  }
  EXPECT_NEAR(worst, ra.grid_error, 1e-14);
}

TEST(FitRational, DeterministicAndCached) {
  const auto a = fit_rational(0.63, 3);
  const auto b = fit_rational(0.63, 3);
  EXPECT_EQ(a.p, b.p);
  EXPECT_EQ(a.q, b.q);
  const auto c1 = cached_rational(0.63, 3);
  const auto c2 = cached_rational(0.6300000001, 3);
  EXPECT_EQ(c1.get(), c2.get());
  EXPECT_EQ(c1->p, a.p);
}

TEST(FitRational, ConstantFitForOrderZeroIsFlagged) {
  const auto ra = fit_rational(0.5, 0);
  EXPECT_TRUE(ra.warning);
  EXPECT_EQ(ra.p.size(), 1u);
  EXPECT_EQ(ra.q, std::vector<double>{1.0});
  // The best constant for a function ranging over [0, 1] sits at 1/2.
  EXPECT_NEAR(ra.grid_error, 0.5, 1e-12);
}

TEST(FitRational, RejectsInvalidArguments) {
  EXPECT_THROW(fit_rational(1.0, 1), std::invalid_argument);
  EXPECT_THROW(fit_rational(-0.1, 1), std::invalid_argument);
  EXPECT_THROW(fit_rational(0.5, 4), std::invalid_argument);
  EXPECT_THROW(fit_rational(0.5, -1), std::invalid_argument);
}

TEST(DiscError, InfiniteWhenPoleInsideDisc) {
  RationalApprox ra;
  ra.m = 1;
  ra.eta = 0.5;
  ra.p = {1.0, 0.0};
  ra.q = {1.0, -2.0};  // pole at z = 1/2
  EXPECT_TRUE(std::isinf(disc_error(ra, 64)));
}

TEST(FracPower, PrincipalBranch) {
  EXPECT_EQ(frac_power(cd(1.0, 0.0), 0.5), cd(0.0, 0.0));
  const cd v = frac_power(cd(0.0, 1.0), 0.5);
  EXPECT_NEAR(std::abs(v), std::pow(2.0, 0.25), 1e-15);
  EXPECT_NEAR(std::arg(v), -std::numbers::pi / 8.0, 1e-15);
}

}  // namespace
}  // namespace stmatern
