#include "stmatern/spectral.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace stmatern {
namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

TEST(BuildBasis, UnitSquareTieOrderIsLexicographic) {
  const auto b = build_basis(RectangleDomain::rectangle(1.0, 1.0), 4);
  ASSERT_EQ(b.size(), 4u);
  const std::vector<Frequency> expected{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  EXPECT_EQ(b.freqs(), expected);
  EXPECT_EQ(b.xis()[0], 0.0);
  EXPECT_DOUBLE_EQ(b.xis()[1], kPi2);
  EXPECT_DOUBLE_EQ(b.xis()[2], kPi2);
  EXPECT_DOUBLE_EQ(b.xis()[3], 2.0 * kPi2);
}

TEST(BuildBasis, OneDimensionalCosineSpectrum) {
  const auto b = build_basis(RectangleDomain::interval(1.0), 256);
  for (std::size_t k = 0; k < b.size(); ++k) {
    EXPECT_DOUBLE_EQ(b.xis()[k], static_cast<double>(k * k) * kPi2);
  }
}

TEST(BuildBasis, OrderingMatchesFullLatticeEnumeration) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dom = RectangleDomain::rectangle(u(rng), u(rng));
    const std::size_t M = 1 + trial * 13;
    const auto b = build_basis(dom, M);
    ASSERT_EQ(b.size(), M);
    std::vector<double> lattice;
    for (int i = 0; i <= 400; ++i) {
      for (int j = 0; j <= 400; ++j) lattice.push_back(neumann_eigenvalue(dom, {i, j}));
    }
    std::sort(lattice.begin(), lattice.end());
    for (std::size_t k = 0; k < M; ++k) {
      EXPECT_DOUBLE_EQ(b.xis()[k], lattice[k]);
      if (k > 0) EXPECT_LE(b.xis()[k - 1], b.xis()[k]);
      const auto f = b.freqs()[k];
      const double direct =
          (f.i * f.i / (dom.lengths[0] * dom.lengths[0]) + f.j * f.j / (dom.lengths[1] * dom.lengths[1])) *
          kPi2;
      EXPECT_DOUBLE_EQ(b.xis()[k], direct);
    }
  }
}

TEST(BuildBasis, RejectsInvalidInput) {
  EXPECT_THROW(build_basis(RectangleDomain::rectangle(1.0, 1.0), 0), std::invalid_argument);
  EXPECT_THROW(RectangleDomain::rectangle(-1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(RectangleDomain::interval(0.0), std::invalid_argument);
}

TEST(EvalBasis, ConstantModeAndCornerValue) {
  const auto dom = RectangleDomain::rectangle(2.0, 3.0);
  const auto b = build_basis(dom, 10);
  const double c = 1.0 / std::sqrt(6.0);
  for (const Location s : {Location{0.0, 0.0}, Location{1.3, 2.9}, Location{2.0, 3.0}}) {
    EXPECT_DOUBLE_EQ(eval_basis(b, s)[0], c);
  }
  const auto unit = build_basis(RectangleDomain::rectangle(1.0, 1.0), 4);
  const std::size_t k = unit.index_of({1, 0});
  ASSERT_LT(k, unit.size());
  EXPECT_DOUBLE_EQ(eval_basis(unit, {0.0, 0.0})[static_cast<Eigen::Index>(k)], std::numbers::sqrt2);
  EXPECT_EQ(unit.index_of({7, 7}), unit.size());
}

TEST(EvalBasis, OutsideDomainThrows) {
  const auto b = build_basis(RectangleDomain::rectangle(1.0, 1.0, 0.5, 0.5), 3);
  EXPECT_THROW(eval_basis(b, {0.4, 0.6}), std::out_of_range);
  EXPECT_THROW(eval_basis(b, {1.0, 1.6}), std::out_of_range);
  EXPECT_NO_THROW(eval_basis(b, {1.5, 1.5}));
}

TEST(EvalBasis, UnitL2NormAndOrthogonalityByQuadrature) {
  const auto dom = RectangleDomain::rectangle(1.5, 0.7);
  const auto b = build_basis(dom, 30);
  const auto [x, wx] = testing::gauss_legendre(80, 0.0, dom.lengths[0]);
  const auto [y, wy] = testing::gauss_legendre(80, 0.0, dom.lengths[1]);
  std::vector<Location> locs;
  std::vector<double> w;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      locs.push_back({x[i], y[j]});
      w.push_back(wx[i] * wy[j]);
    }
  }
  const Eigen::MatrixXd H = design_matrix(b, locs);
  const Eigen::Map<const Eigen::VectorXd> W(w.data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::MatrixXd gram = H.transpose() * W.asDiagonal() * H;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(EvalBasis, TrapezoidGramIsNearIdentity) {
  const auto dom = RectangleDomain::rectangle(1.0, 2.0);
  const auto b = build_basis(dom, 16);
  const int n = 801;
  std::vector<Location> locs;
  std::vector<double> w;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      locs.push_back({dom.lengths[0] * i / (n - 1.0), dom.lengths[1] * j / (n - 1.0)});
      w.push_back(wi * wj * dom.measure() / ((n - 1.0) * (n - 1.0)));
    }
  }
  const Eigen::MatrixXd H = design_matrix(b, locs);
  const Eigen::Map<const Eigen::VectorXd> W(w.data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::MatrixXd gram = H.transpose() * W.asDiagonal() * H;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(EvalBasis, SupNormBound) {
  const auto dom = RectangleDomain::rectangle(0.8, 1.9);
  const auto b = build_basis(dom, 50);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(0.0, 0.8), uy(0.0, 1.9);
  const double bound = 2.0 / std::sqrt(dom.measure());
  for (int i = 0; i < 500; ++i) {
    EXPECT_LE(eval_basis(b, {ux(rng), uy(rng)}).cwiseAbs().maxCoeff(), bound + 1e-15);
  }
}

TEST(DesignMatrix, EmptyAndReconstruction) {
  const auto dom = RectangleDomain::rectangle(1.0, 1.0);
  const auto b = build_basis(dom, 12);
  EXPECT_EQ(design_matrix(b, {}).rows(), 0);
  EXPECT_EQ(design_matrix(b, {}).cols(), 12);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Eigen::VectorXd c(12);
  for (auto& v : c) v = nd(rng);
  std::vector<Location> locs(20);
  for (auto& s : locs) s = {ud(rng), ud(rng)};
  const Eigen::VectorXd field = design_matrix(b, locs) * c;
  for (std::size_t l = 0; l < locs.size(); ++l) {
    double direct = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      const auto f = b.freqs()[k];
      const double nx = f.i == 0 ? 1.0 : std::numbers::sqrt2;
      const double ny = f.j == 0 ? 1.0 : std::numbers::sqrt2;
      direct += c[static_cast<Eigen::Index>(k)] * nx * ny * std::cos(std::numbers::pi * f.i * locs[l][0]) *
                std::cos(std::numbers::pi * f.j * locs[l][1]);
    }
    EXPECT_NEAR(field[static_cast<Eigen::Index>(l)], direct, 1e-12);
  }
  EXPECT_DOUBLE_EQ(design_matrix(b, std::vector<Location>{{0.3, 0.2}})(0, 0), 1.0);
}

TEST(WriteBasisCsv, HeaderAndRows) {
  std::ostringstream os;
  write_basis_csv(os, build_basis(RectangleDomain::interval(2.0), 3));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "k,i,j,xi,norm");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

}  // namespace
}  // namespace stmatern
