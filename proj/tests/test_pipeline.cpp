#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "emdsparse/emd.hpp"
#include "emdsparse/generate.hpp"
#include "emdsparse/io.hpp"
#include "emdsparse/pipeline.hpp"
#include "oracles.hpp"

using namespace emdsparse;

namespace {

SchemeConfig config(Scheme s, int delta, int k, std::uint64_t seed = 0) {
  SchemeConfig c;
  c.scheme = s;
  c.delta = delta;
  c.k = k;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Scheme, NamesRoundTrip) {
  for (Scheme s : all_schemes()) EXPECT_EQ(parse_scheme(scheme_name(s)), s);
  EXPECT_THROW(parse_scheme("pyramid"), std::invalid_argument);
}

TEST(Validate, RejectsBadConfigs) {
  SchemeConfig c = config(Scheme::pyramid_dense, 8, 1);
  EXPECT_NO_THROW(validate(c));
  c.k = 33;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c.k = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = config(Scheme::pyramid_dense, 12, 1);
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = config(Scheme::pyramid_dense, 8, 1);
  c.eps = 1.5;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c.eps = 0.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Sketch, ZeroImageGivesZeroMeasurements) {
  for (Scheme s : all_schemes()) {
    const auto m = sketch(config(s, 16, 2), GridImage(16));
    EXPECT_TRUE(std::all_of(m.begin(), m.end(), [](double v) { return v == 0.0; })) << scheme_name(s);
  }
}

TEST(Sketch, IsLinear) {
  std::mt19937_64 rng(81);
  for (Scheme s : all_schemes()) {
    const SchemeConfig c = config(s, 16, 2, 5);
    for (int trial = 0; trial < 3; ++trial) {
      const GridImage x = oracle::random_sparse_image(16, 20, 5, rng);
      const GridImage y = oracle::random_sparse_image(16, 20, 5, rng);
      const auto sx = sketch(c, x), sy = sketch(c, y), sxy = sketch(c, x + y);
      for (std::size_t i = 0; i < sxy.size(); ++i)
        EXPECT_NEAR(sxy[i], sx[i] + sy[i], 1e-9 * (1.0 + std::abs(sxy[i])));
    }
  }
}

TEST(Sketch, RejectsNegativeOrMismatchedImage) {
  GridImage x(16);
  x.at(1, 1) = -1.0;
  EXPECT_THROW(sketch(config(Scheme::pyramid_dense, 16, 1), x), std::invalid_argument);
  EXPECT_THROW(sketch(config(Scheme::pyramid_dense, 16, 1), GridImage(8)), std::invalid_argument);
}

TEST(RowBudget, RowsNeverExceedFormula) {
  for (Scheme s : all_schemes())
    for (int delta : {16, 32, 64})
      for (int k : {1, 2, 4, 8})
        for (double eps : {0.5, 1.0}) {
          SchemeConfig c = config(s, delta, k);
          c.eps = eps;
          if (s != Scheme::pyramid_randomized && eps < 1.0 && delta < 64) continue;
          SchemeDims d;
          try {
            d = scheme_dims(c);
          } catch (const std::invalid_argument&) {
            continue;  // more rows than coefficients at this size
          }
          EXPECT_LE(double(d.rows), row_bound(c)) << scheme_name(s) << " " << delta << " " << k << " " << eps;
        }
}

TEST(RowBudget, RandomizedRowsMatchSketchLayout) {
  const SchemeConfig c = config(Scheme::pyramid_randomized, 32, 4);
  EXPECT_EQ(sketch(c, GridImage(32)).size(), scheme_dims(c).rows);
}

TEST(Recover, ZeroMeasurementsGiveZeroImage) {
  for (Scheme s : all_schemes()) {
    const SchemeConfig c = config(s, 16, 2);
    const Recovery r = recover(c, sketch(c, GridImage(16)));
    EXPECT_EQ(r.x.l1_norm(), 0.0) << scheme_name(s);
  }
}

TEST(Recover, KSparseImageIsRecoveredByDenseScheme) {
  std::mt19937_64 rng(82);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GridImage x = oracle::random_sparse_image(16, 2, 9, rng);
    const SchemeConfig c = config(Scheme::pyramid_dense, 16, 2, seed);
    const Recovery r = recover(c, sketch(c, x));
    EXPECT_LE(emd_distance(x, r.x), 1e-6 * x.l1_norm() * 16) << "seed " << seed;
  }
}

TEST(Recover, RejectsWrongMeasurementCount) {
  const SchemeConfig c = config(Scheme::pyramid_tree_cosamp, 16, 2);
  EXPECT_THROW(recover(c, std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST(StrictSparsify, KSparseInputIsUnchanged) {
  GridImage x(8);
  x.at(1, 2) = 3.0;
  x.at(6, 6) = 1.5;
  EXPECT_EQ(strict_sparsify(x, 2).image, x);
  EXPECT_EQ(strict_sparsify(x, 5).image, x);
}

TEST(StrictSparsify, OneMedianMatchesBruteForce) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    const GridImage x = oracle::random_sparse_image(8, 5, 4, rng);
    if (x.support().size() <= 1) continue;
    const Sparsified s = strict_sparsify(x, 1);
    EXPECT_NEAR(s.clustering.cost, oracle::brute_force_one_median(x), 1e-9);
    EXPECT_NEAR(emd_distance(x, s.image), s.clustering.cost, 1e-9);
  }
}

TEST(StrictSparsify, TwoSeparatedMassesStayPut) {
  GridImage x(16);
  x.at(0, 0) = 5.0;
  x.at(15, 15) = 2.0;
  const Sparsified s = strict_sparsify(x, 2);
  EXPECT_EQ(s.image, x);
  EXPECT_EQ(s.clustering.cost, 0.0);
}

TEST(StrictSparsify, PreservesMassWithAtMostKNonzeros) {
  std::mt19937_64 rng(84);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    GridImage x(16);
    std::uniform_int_distribution<std::size_t> pick(0, 255);
    for (int p = 0; p < 30; ++p) x[pick(rng)] = u(rng);
    for (int k : {1, 2, 4}) {
      const Sparsified s = strict_sparsify(x, k);
      EXPECT_LE(s.image.support().size(), std::size_t(k));
      EXPECT_NEAR(s.image.l1_norm(), x.l1_norm(), 1e-9);
    }
  }
}

TEST(StrictSparsify, RejectsNegativeInput) {
  GridImage x(4);
  x[0] = -1.0;
  EXPECT_THROW(strict_sparsify(x, 1), std::invalid_argument);
}

TEST(RunTrial, ChainAndClaimHoldOnClusterImages) {
  for (Scheme s : all_schemes()) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      GenOptions g;
      g.delta = 16;
      g.k = 2;
      g.total_mass = 300;
      g.seed = seed;
      const RecoveryReport r = run_trial(config(s, 16, 2, seed), generate(g));
      EXPECT_TRUE(r.chain_ok) << scheme_name(s) << " seed " << seed;
      EXPECT_TRUE(r.claim_ok) << scheme_name(s) << " seed " << seed;
      EXPECT_TRUE(r.success);
      EXPECT_LE(r.emd_error_raw, r.embed_l1 + 1e-6);
      EXPECT_GE(r.ratio, 1.0 - 1e-9);
    }
  }
}

TEST(RunTrial, ExactInputIsFlagged) {
  GenOptions g;
  g.delta = 8;
  g.k = 1;
  g.spread = 0.0;
  g.kind = ImageKind::clusters;
  const RecoveryReport r = run_trial(config(Scheme::pyramid_dense, 8, 1), generate(g));
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.ratio, 0.0);
  EXPECT_LE(r.emd_error, 1e-6 * 8 * 1000);
}

TEST(SketchFile, RoundTrips) {
  SchemeConfig c = config(Scheme::haar_tree_cosamp, 16, 3, 77);
  c.eps = 1.0;
  c.c_rows = 6.5;
  GenOptions g;
  g.delta = 16;
  const auto meas = sketch(c, generate(g));
  std::stringstream ss;
  write_sketch(ss, c, meas);
  const auto [back, values] = read_sketch(ss);
  EXPECT_EQ(back.scheme, c.scheme);
  EXPECT_EQ(back.delta, 16);
  EXPECT_EQ(back.k, 3);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.c_rows, 6.5);
  EXPECT_EQ(values, meas);
}

TEST(SketchFile, RejectsMalformedInput) {
  std::stringstream bad("EMDSKT v2\n");
  EXPECT_THROW(read_sketch(bad), std::runtime_error);
  std::stringstream unknown("EMDSKT v1\ncolour red\n");
  EXPECT_THROW(read_sketch(unknown), std::runtime_error);
  std::stringstream truncated("EMDSKT v1\nscheme pyramid_dense\ndelta 8\nk 1\nmeasurements 3\n1 2\n");
  EXPECT_THROW(read_sketch(truncated), std::runtime_error);
}

TEST(Generate, ZeroSpreadIsKSparse) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GenOptions g;
    g.kind = ImageKind::clusters;
    g.spread = 0.0;
    g.k = 5;
    g.seed = seed;
    const GridImage x = generate(g);
    EXPECT_LE(x.support().size(), 5u);
    EXPECT_EQ(x.l1_norm(), 1000.0);
  }
}

TEST(Generate, IsDeterministicPerSeed) {
  for (ImageKind kind : {ImageKind::clusters, ImageKind::uniform_noise, ImageKind::clusters_plus_noise}) {
    GenOptions g;
    g.kind = kind;
    g.seed = 9;
    std::ostringstream a, b;
    write_image(a, generate(g));
    write_image(b, generate(g));
    EXPECT_EQ(a.str(), b.str());
    g.seed = 10;
    std::ostringstream c;
    write_image(c, generate(g));
    EXPECT_NE(a.str(), c.str());
  }
}

TEST(Generate, NoiseFractionCountsUnits) {
  GenOptions g;
  g.kind = ImageKind::clusters_plus_noise;
  g.spread = 0.0;
  g.total_mass = 2000;
  g.seed = 3;
  GenOptions clean = g;
  clean.kind = ImageKind::clusters;
  clean.total_mass = 1900;
  // Same seed and center draws: removing the clean part leaves the scattered units.
  const GridImage x = generate(g);
  const GridImage c = generate(clean);
  double noise = 0.0;
  for (std::size_t p = 0; p < x.size(); ++p) {
    EXPECT_GE(x[p], c[p]);
    noise += x[p] - c[p];
  }
  EXPECT_EQ(noise / x.l1_norm(), 0.05);
}

TEST(Generate, RejectsBadArguments) {
  GenOptions g;
  g.delta = 10;
  EXPECT_THROW(generate(g), std::invalid_argument);
  g.delta = 8;
  g.spread = -1.0;
  EXPECT_THROW(generate(g), std::invalid_argument);
  EXPECT_THROW(parse_image_kind("stars"), std::invalid_argument);
}
