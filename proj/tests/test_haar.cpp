#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "emdsparse/emd.hpp"
#include "emdsparse/haar.hpp"
#include "oracles.hpp"

using namespace emdsparse;

namespace {

std::vector<double> dense_apply(const std::vector<double>& W, const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) y[r] += W[r * n + c] * x[c];
  return y;
}

HaarCoeffs random_coeffs(int delta, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  HaarCoeffs y{delta, std::vector<double>(std::size_t(delta) * delta)};
  for (double& v : y.values) v = u(rng);
  return y;
}

GridImage column(int delta, std::size_t i) {
  HaarCoeffs e{delta, std::vector<double>(std::size_t(delta) * delta, 0.0)};
  e.values[i] = 1.0;
  return haar_inverse(e);
}

}  // namespace

TEST(HaarTransform, ConstantImageKeepsOnlyConstantCoefficient) {
  GridImage x(4, std::vector<double>(16, 1.0));
  const HaarCoeffs y = haar_transform(x);
  ASSERT_EQ(y.values.size(), 16u);
  EXPECT_DOUBLE_EQ(y.values[0], 2.0 * 4 * 16);
  for (std::size_t i = 1; i < 16; ++i) EXPECT_EQ(y.values[i], 0.0);
}

TEST(HaarTransform, UnitMassOnDelta2MatchesDenseProduct) {
  GridImage x(2);
  x.at(0, 0) = 1.0;
  const auto W = oracle::naive_haar_matrix(2);
  const auto expect = dense_apply(W, x.values());
  EXPECT_EQ(haar_transform(x).values, expect);
  // Constant 2 delta, then horizontal, vertical, diagonal at scale 1/2.
  const std::vector<double> literal{4.0, 0.5, 0.5, 0.5};
  EXPECT_EQ(expect, literal);
}

TEST(HaarTransform, MatchesDenseMatrixOracle) {
  std::mt19937_64 rng(41);
  for (int delta : {2, 4, 8}) {
    const auto W = oracle::naive_haar_matrix(delta);
    EXPECT_EQ(haar_matrix(delta), W);
    for (int trial = 0; trial < 5; ++trial) {
      const GridImage x = oracle::random_signed_image(delta, 0.7, rng);
      const auto got = haar_transform(x).values;
      const auto expect = dense_apply(W, x.values());
      for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expect[i], 1e-12 * (1 + std::abs(expect[i])));
    }
  }
}

TEST(HaarTransform, CoefficientCountIsN) {
  for (int delta : {1, 2, 16, 64}) EXPECT_EQ(haar_transform(GridImage(delta)).values.size(), std::size_t(delta) * delta);
}

TEST(HaarInverse, ZeroMapsToZero) {
  EXPECT_EQ(haar_inverse(HaarCoeffs{8, std::vector<double>(64, 0.0)}), GridImage(8));
}

TEST(HaarInverse, RoundTripsPointMasses) {
  for (std::size_t p = 0; p < 64; ++p) {
    GridImage e(8);
    e[p] = 1.0;
    const GridImage back = haar_inverse(haar_transform(e));
    for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(back[i], e[i], 1e-12);
  }
}

TEST(HaarInverse, DenseRoundTripOnRandomCoefficients) {
  std::mt19937_64 rng(42);
  const auto W = oracle::naive_haar_matrix(8);
  for (int trial = 0; trial < 10; ++trial) {
    const HaarCoeffs y = random_coeffs(8, rng);
    const auto wy = dense_apply(W, haar_inverse(y).values());
    EXPECT_LE(l1_distance(wy, y.values), 1e-9 * l1_norm(y.values));
  }
}

TEST(HaarInverse, ColumnsHaveUnitEmdNorm) {
  for (int delta : {2, 4, 8}) {
    const std::size_t n = std::size_t(delta) * delta;
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(emd_norm(column(delta, i)), 1.0, 1e-6) << "delta " << delta << " col " << i;
  }
}

TEST(HaarRowWeight, DiagonalFactorIsCheckerboardEmd) {
  for (int level = 1; level <= 5; ++level) {
    const int len = 1 << level, half = len / 2;
    GridImage v(len);
    const double m = std::ldexp(1.0, 2 - 3 * level);
    for (int r = 0; r < len; ++r)
      for (int c = 0; c < len; ++c) v.at(r, c) = ((r < half) == (c < half)) ? m : -m;
    const double plain = std::ldexp(1.0, level - 2);
    EXPECT_NEAR(haar_row_weight(level, HaarOrientation::diagonal) / plain, emd_norm(v), 1e-12) << "level " << level;
    EXPECT_EQ(haar_row_weight(level, HaarOrientation::horizontal), plain);
    EXPECT_EQ(haar_row_weight(level, HaarOrientation::vertical), plain);
  }
}

TEST(PropertyA, HaarExpandsEmd) {
  std::mt19937_64 rng(43);
  for (int delta : {2, 4, 8}) {
    for (int trial = 0; trial < 20; ++trial) {
      const GridImage w = oracle::random_signed_image(delta, 0.5, rng);
      EXPECT_LE(emd_norm(w), l1_norm(haar_transform(w).values) + 1e-9);
    }
  }
}

TEST(HaarRows, QuarterOfPyramidRowOnNonnegativeImages) {
  std::mt19937_64 rng(44);
  const Grid grid(16);
  for (int trial = 0; trial < 10; ++trial) {
    const GridImage x = oracle::random_sparse_image(16, 40, 10, rng);
    const auto px = pyramid_transform(x).values;
    const auto wx = haar_transform(x).values;
    for (std::size_t q = 0; q < grid.level_offset(0); ++q)
      for (auto o : {HaarOrientation::horizontal, HaarOrientation::vertical, HaarOrientation::diagonal})
        EXPECT_LE(std::abs(wx[haar_index(q, o)]), 0.25 * px[q] + 1e-12);
  }
}

TEST(HaarCertificate, KSparseInputHasZeroResidual) {
  GridImage x(16);
  x.at(0, 15) = 3.0;
  x.at(9, 4) = 1.0;
  const HaarAlignmentCertificate c = haar_alignment_certificate(x, 2, 1.0);
  EXPECT_DOUBLE_EQ(c.residual_l1, 0.0);
  EXPECT_DOUBLE_EQ(c.pyramid.residual_l1, 0.0);
}

TEST(HaarCertificate, ConstantImageHasZeroResidual) {
  for (int k : {1, 3}) {
    const GridImage x(8, std::vector<double>(64, 2.0));
    const HaarAlignmentCertificate c = haar_alignment_certificate(x, k, 1.0);
    EXPECT_DOUBLE_EQ(c.residual_l1, 0.0);
    EXPECT_EQ(c.coefficients.front(), 0u);
  }
}

TEST(HaarCertificate, ResidualIsThreeQuartersOfPyramidResidual) {
  std::mt19937_64 rng(45);
  std::normal_distribution<double> off(0.0, 2.0);
  for (int trial = 0; trial < 8; ++trial) {
    GridImage x(16);
    for (int j = 0; j < 2; ++j) {
      const int r = 3 + 9 * j, c = 12 - 8 * j;
      for (int p = 0; p < 12; ++p) {
        const int rr = std::clamp(r + int(std::lround(off(rng))), 0, 15);
        const int cc = std::clamp(c + int(std::lround(off(rng))), 0, 15);
        x.at(rr, cc) += 1.0;
      }
    }
    x = x + oracle::random_sparse_image(16, 3, 1, rng);
    const HaarAlignmentCertificate c = haar_alignment_certificate(x, 2, 1.0);
    EXPECT_LE(c.residual_l1, 0.75 * c.pyramid.residual_l1 + 1e-9);
    EXPECT_LE(c.residual_l1, c.pyramid.median_emd + 1e-9);
  }
}

TEST(HaarCertificate, LiftKeepsSupernodesWhole) {
  const Grid grid(8);
  const TreeSupport s = close_under_parent(grid, std::vector<std::size_t>{grid.index({0, 5, 5}), grid.index({1, 0, 3})});
  const auto lifted = lift_to_haar(grid, s);
  EXPECT_TRUE(std::is_sorted(lifted.begin(), lifted.end()));
  std::size_t above_leaves = 0;
  for (std::size_t q : s.cells) above_leaves += grid.level_of(q) > 0;
  EXPECT_EQ(lifted.size(), 1 + 3 * above_leaves);
}
