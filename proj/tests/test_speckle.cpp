#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "saredge/speckle.hpp"

using namespace saredge;

namespace {

SimulationSpec homogeneous(double mu, double looks, int size = 128, int count = 2) {
  SimulationSpec spec;
  spec.labelmap = LabelMap(size, size, 0);
  ClassModel m;
  m.class_id = 0;
  m.looks = looks;
  m.mean_intensity[Channel::HH] = mu;
  m.mean_intensity[Channel::HV] = mu;
  spec.classes = {m};
  spec.channels = {Channel::HH, Channel::HV};
  spec.count = count;
  spec.master_seed = 42;
  spec.saturation = 2.0;
  return spec;
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

TEST(Phantom, StripsAreHorizontalBands) {
  const LabelMap m = generate_phantom(PhantomKind::Strips, 64, 4);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) ASSERT_EQ(m(r, c), r / 16);
  }
}

TEST(Phantom, CheckerboardUsesEightPixelTiles) {
  const LabelMap m = generate_phantom(PhantomKind::Checkerboard, 64, 2);
  EXPECT_EQ(m(0, 0), 0);
  EXPECT_EQ(m(7, 7), 0);
  EXPECT_EQ(m(0, 8), 1);
  EXPECT_EQ(m(8, 0), 1);
  EXPECT_EQ(m(8, 8), 0);
  EXPECT_EQ(m(63, 56), 0);
}

TEST(Phantom, NestedSquaresFormConcentricRings) {
  const LabelMap m = generate_phantom(PhantomKind::NestedSquares, 63, 3);
  std::set<int> labels(m.pixels().begin(), m.pixels().end());
  EXPECT_EQ(labels, (std::set<int>{0, 1, 2}));
  // Labels depend only on the distance to the border and grow inward.
  for (int r = 0; r < 63; ++r) {
    for (int c = 0; c < 63; ++c) {
      const int depth = std::min({r, c, 62 - r, 62 - c});
      ASSERT_EQ(m(r, c), m(depth, depth));
    }
  }
  for (int d = 1; d < 32; ++d) EXPECT_GE(m(d, d), m(d - 1, d - 1));
  EXPECT_EQ(m(0, 0), 0);
  EXPECT_EQ(m(31, 31), 2);
}

TEST(Phantom, RejectsBadArguments) {
  EXPECT_THROW(generate_phantom(PhantomKind::Strips, 8, 2), std::invalid_argument);
  EXPECT_THROW(generate_phantom(PhantomKind::Strips, 64, 1), std::invalid_argument);
  EXPECT_THROW(parse_phantom_kind("circles"), std::invalid_argument);
}

TEST(Speckle, IntensityMeanWithinFourStandardErrors) {
  const SimulationSpec spec = homogeneous(1.0, 4.0);
  const GrayImage img = simulate_intensity(spec, Channel::HH, 0);
  const double n = static_cast<double>(img.size());
  EXPECT_NEAR(mean(img.pixels()), 1.0, 4.0 * 1.0 / std::sqrt(4.0 * n));
}

TEST(Speckle, AmplitudeSquaredMeanMatchesIntensityMean) {
  SimulationSpec spec = homogeneous(1.0, 4.0);
  spec.saturation = 100.0;  // keep clear of clipping
  const GrayImage a = simulate_channel(spec, Channel::HH, 0);
  double sum = 0.0;
  for (double v : a.pixels()) sum += (v * spec.saturation) * (v * spec.saturation);
  const double n = static_cast<double>(a.size());
  EXPECT_NEAR(sum / n, 1.0, 4.0 / std::sqrt(4.0 * n));
}

TEST(Speckle, IntensityCoefficientOfVariation) {
  for (double looks : {1.0, 4.0, 16.0}) {
    const SimulationSpec spec = homogeneous(2.5, looks);
    const GrayImage img = simulate_intensity(spec, Channel::HV, 1);
    const double m = mean(img.pixels());
    double ss = 0.0;
    for (double v : img.pixels()) ss += (v - m) * (v - m);
    const double cv = std::sqrt(ss / (img.size() - 1)) / m;
    EXPECT_NEAR(cv, 1.0 / std::sqrt(looks), 0.1 / std::sqrt(looks)) << "L=" << looks;
  }
}

TEST(Speckle, SimulationsAreUncorrelated) {
  const SimulationSpec spec = homogeneous(1.0, 4.0);
  const GrayImage a = simulate_intensity(spec, Channel::HH, 0);
  const GrayImage b = simulate_intensity(spec, Channel::HH, 1);
  const GrayImage c = simulate_intensity(spec, Channel::HV, 0);
  auto corr = [](const GrayImage& x, const GrayImage& y) {
    const double mx = mean(x.pixels()), my = mean(y.pixels());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double dx = x.pixels()[i] - mx, dy = y.pixels()[i] - my;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    return sxy / std::sqrt(sxx * syy);
  };
  EXPECT_LT(std::abs(corr(a, b)), 0.05);
  EXPECT_LT(std::abs(corr(a, c)), 0.05);
}

TEST(Speckle, ManyLooksConcentrateOnMeanAmplitude) {
  const SimulationSpec spec = homogeneous(1.0, 1e6, 32, 1);
  const GrayImage a = simulate_channel(spec, Channel::HH, 0);
  for (double v : a.pixels()) ASSERT_NEAR(v, 0.5, 1e-2);
}

TEST(Speckle, DeterministicAndSubsetReproducible) {
  SimulationSpec spec = homogeneous(1.0, 4.0, 32, 5);
  const GrayImage first = simulate_channel(spec, Channel::HV, 3);
  EXPECT_EQ(first, simulate_channel(spec, Channel::HV, 3));
  spec.count = 10;
  EXPECT_EQ(first, simulate_channel(spec, Channel::HV, 3));
  spec.master_seed += 1;
  EXPECT_NE(first, simulate_channel(spec, Channel::HV, 3));
}

TEST(Speckle, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t master : {0ULL, 1ULL, 2ULL}) {
    for (int sim = 0; sim < 50; ++sim) {
      for (Channel ch : kAllChannels) seeds.insert(derive_seed(master, sim, ch));
    }
  }
  EXPECT_EQ(seeds.size(), 3u * 50u * 3u);
}

TEST(Speckle, GrayValuesClippedToUnitInterval) {
  SimulationSpec spec = homogeneous(1.0, 1.0, 64, 1);
  spec.saturation = 0.5;
  const GrayImage a = simulate_channel(spec, Channel::HH, 0);
  for (double v : a.pixels()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
  EXPECT_GT(std::count(a.pixels().begin(), a.pixels().end(), 1.0), 0);
}

TEST(Speckle, ValidationErrors) {
  SimulationSpec spec = homogeneous(1.0, 4.0, 16, 1);
  EXPECT_NO_THROW(spec.validate());
  spec.channels.push_back(Channel::VV);
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = homogeneous(1.0, 4.0, 16, 1);
  spec.labelmap(0, 0) = 3;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = homogeneous(1.0, 4.0, 16, 1);
  EXPECT_THROW((void)simulate_channel(spec, Channel::VV, 0), std::invalid_argument);
  EXPECT_THROW((void)simulate_channel(spec, Channel::HH, 1), std::out_of_range);
}

TEST(Saturation, DefaultAndWide) {
  ClassModel a{0, {{Channel::HH, 1.0}}, 4.0};
  ClassModel b{1, {{Channel::HH, 4.0}, {Channel::HV, 2.0}}, 4.0};
  EXPECT_DOUBLE_EQ(default_saturation({a, b}), 2.0);
  EXPECT_DOUBLE_EQ(wide_saturation({a, b}), 2.0 + 3.0 * 2.0 / 2.0);
}

TEST(GroundTruth, ConstantMapHasNoEdges) {
  EXPECT_EQ(count_nonzero(ground_truth_edges(LabelMap(10, 10, 2))), 0u);
}

TEST(GroundTruth, VerticalBoundaryAtColumnOne) {
  LabelMap m(4, 4, 0);
  for (int r = 0; r < 4; ++r) {
    m(r, 2) = 1;
    m(r, 3) = 1;
  }
  const BinaryImage gt = ground_truth_edges(m);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) EXPECT_EQ(gt(r, c), c == 1 ? 1 : 0) << r << "," << c;
  }
}

TEST(GroundTruth, UnitCheckerboardIsEdgeExceptLastRowAndColumn) {
  LabelMap m(6, 5);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 6; ++c) m(r, c) = (r + c) % 2;
  }
  const BinaryImage gt = ground_truth_edges(m);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 6; ++c) EXPECT_EQ(gt(r, c), (r < 4 || c < 5) ? 1 : 0);
  }
  EXPECT_EQ(gt(4, 5), 0);
}

TEST(GroundTruth, InvariantUnderClassPermutation) {
  const LabelMap m = generate_phantom(PhantomKind::NestedSquares, 64, 4);
  const int perm[] = {2, 0, 3, 1};
  LabelMap p = m;
  for (auto& v : p.pixels()) v = perm[v];
  EXPECT_EQ(ground_truth_edges(m), ground_truth_edges(p));
}

TEST(Labelmap, ByteRoundTrip) {
  const LabelMap m = generate_phantom(PhantomKind::Checkerboard, 32, 3);
  EXPECT_EQ(labelmap_from_bytes(labelmap_bytes(m)), m);
}
