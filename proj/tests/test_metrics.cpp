#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "saredge/metrics.hpp"

using namespace saredge;

namespace {

BinaryImage with_pixels(int w, int h, std::initializer_list<std::pair<int, int>> px) {
  BinaryImage b(w, h);
  for (auto [r, c] : px) b(r, c) = 1;
  return b;
}

}  // namespace

TEST(DistanceTransform, AllForegroundIsZero) {
  const DistanceMap d = distance_transform(BinaryImage(6, 4, 1));
  for (auto v : d.squared.pixels()) EXPECT_EQ(v, 0);
}

TEST(DistanceTransform, CornerSiteInThreeByThree) {
  const DistanceMap d = distance_transform(with_pixels(3, 3, {{0, 0}}));
  const std::int64_t expected[] = {0, 1, 4, 1, 2, 5, 4, 5, 8};
  for (int i = 0; i < 9; ++i) EXPECT_EQ(d.squared.pixels()[i], expected[i]);
  EXPECT_DOUBLE_EQ(d.distance(2, 1), std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(d.distance(2, 2), 2.0 * std::sqrt(2.0));
}

TEST(DistanceTransform, EmptyImageHasNoForeground) {
  const DistanceMap d = distance_transform(BinaryImage(5, 5));
  EXPECT_FALSE(d.has_foreground);
  EXPECT_TRUE(std::isinf(d.distance(2, 2)));
}

TEST(DistanceTransform, MatchesNaiveOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const double density = 0.002 + 0.3 * (trial % 10) / 10.0;
    const BinaryImage b = oracle::random_binary(rng, 32 + trial % 3, 32 - trial % 2, density);
    if (count_nonzero(b) == 0) continue;
    const auto ref = oracle::squared_distances(b);
    const DistanceMap d = distance_transform(b);
    for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_EQ(d.squared.pixels()[i], ref[i]);
  }
}

TEST(Bdm, IdentityIsZero) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryImage x = oracle::random_binary(rng, 16, 16, 0.1);
    EXPECT_EQ(baddeley_delta(x, x), 0.0);
  }
  EXPECT_EQ(baddeley_delta(BinaryImage(16, 16), BinaryImage(16, 16)), 0.0);
}

TEST(Bdm, SinglePixelPairMatchesDirectFormula) {
  const BinaryImage x = with_pixels(16, 16, {{6, 5}});
  const BinaryImage y = with_pixels(16, 16, {{9, 10}});
  for (double p : {1.0, 2.0, 3.5}) {
    EXPECT_NEAR(baddeley_delta(x, y, BdmConfig{p, 4}), oracle::bdm(x, y, p, 4), 1e-9);
  }
}

TEST(Bdm, MatchesNaiveOracleOnRandomPairs) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const BinaryImage x = oracle::random_binary(rng, 16, 16, 0.02 + 0.01 * (trial % 10));
    const BinaryImage y = oracle::random_binary(rng, 16, 16, 0.05);
    for (int frame : {0, 2, 4}) {
      EXPECT_NEAR(baddeley_delta(x, y, BdmConfig{2.0, frame}), oracle::bdm(x, y, 2.0, frame), 1e-9);
    }
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_NEAR(baddeley_delta(x, y, BdmConfig{inf, 4}), oracle::bdm(x, y, inf, 4), 1e-9);
  }
}

TEST(Bdm, EmptyDetectionIsOneDiagonalAway) {
  const BinaryImage y = with_pixels(16, 16, {{8, 8}});
  const double d = baddeley_delta(BinaryImage(16, 16), y);
  EXPECT_NEAR(d, oracle::bdm(BinaryImage(16, 16), y, 2.0, 4), 1e-12);
  EXPECT_GT(d, 0.0);
  EXPECT_LE(d, 1.0);
}

TEST(Bdm, ForegroundInFrameIsIgnored) {
  const BinaryImage y = with_pixels(16, 16, {{8, 8}});
  const BinaryImage x = with_pixels(16, 16, {{8, 8}, {0, 0}, {15, 3}});
  EXPECT_EQ(baddeley_delta(x, y), 0.0);
}

TEST(Bdm, Symmetric) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryImage x = oracle::random_binary(rng, 16, 16, 0.1);
    const BinaryImage y = oracle::random_binary(rng, 16, 16, 0.03);
    EXPECT_EQ(baddeley_delta(x, y), baddeley_delta(y, x));
  }
}

TEST(Bdm, TriangleInequality) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 8 + trial % 9;
    const BinaryImage x = oracle::random_binary(rng, w, w, 0.1);
    const BinaryImage y = oracle::random_binary(rng, w, w, 0.05);
    const BinaryImage z = oracle::random_binary(rng, w, w, 0.2);
    const BdmConfig cfg{2.0, 2};
    EXPECT_LE(baddeley_delta(x, z, cfg), baddeley_delta(x, y, cfg) + baddeley_delta(y, z, cfg) + 1e-9);
  }
}

TEST(Bdm, InvariantWhenContentAndSiteSetMoveTogether) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryImage x = oracle::random_binary(rng, 16, 16, 0.08);
    const BinaryImage y = oracle::random_binary(rng, 16, 16, 0.04);
    const int k = 1 + trial % 5;
    BinaryImage xs(16 + 2 * k, 16 + 2 * k), ys(16 + 2 * k, 16 + 2 * k);
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) {
        xs(r + k, c + k) = x(r, c);
        ys(r + k, c + k) = y(r, c);
      }
    }
    EXPECT_NEAR(baddeley_delta(x, y, BdmConfig{2.0, 3}), baddeley_delta(xs, ys, BdmConfig{2.0, 3 + k}), 1e-12);
  }
}

TEST(Bdm, InvariantUnderSiteSetSymmetries) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryImage x = oracle::random_binary(rng, 16, 16, 0.08);
    const BinaryImage y = oracle::random_binary(rng, 16, 16, 0.04);
    BinaryImage xt(16, 16), yt(16, 16), xf(16, 16), yf(16, 16);
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) {
        xt(c, r) = x(r, c);
        yt(c, r) = y(r, c);
        xf(r, 15 - c) = x(r, c);
        yf(r, 15 - c) = y(r, c);
      }
    }
    const double d = baddeley_delta(x, y);
    EXPECT_NEAR(baddeley_delta(xt, yt), d, 1e-12);
    EXPECT_NEAR(baddeley_delta(xf, yf), d, 1e-12);
  }
}

TEST(Bdm, DilationAwayFromTruthIncreasesDistance) {
  BinaryImage truth(32, 32);
  for (int r = 0; r < 32; ++r) truth(r, 15) = 1;
  double previous = 0.0;
  for (int width = 1; width <= 6; ++width) {
    BinaryImage detected = truth;
    for (int r = 0; r < 32; ++r) {
      for (int c = 16; c < 16 + width; ++c) detected(r, c) = 1;
    }
    const double d = baddeley_delta(detected, truth);
    EXPECT_GT(d, previous) << "width " << width;
    previous = d;
  }
}

TEST(Bdm, ScoreIsHundredTimesDelta) {
  const BinaryImage x = with_pixels(16, 16, {{5, 5}});
  const BinaryImage y = with_pixels(16, 16, {{10, 7}});
  EXPECT_DOUBLE_EQ(bdm_score(x, y), 100.0 * baddeley_delta(x, y));
}

TEST(Bdm, ArgumentValidation) {
  EXPECT_THROW(baddeley_delta(BinaryImage(8, 8), BinaryImage(8, 9)), std::invalid_argument);
  EXPECT_THROW(baddeley_delta(BinaryImage(8, 8), BinaryImage(8, 8), BdmConfig{0.5, 0}), std::invalid_argument);
  EXPECT_THROW(baddeley_delta(BinaryImage(8, 8), BinaryImage(8, 8), BdmConfig{2.0, 4}), std::invalid_argument);
}
