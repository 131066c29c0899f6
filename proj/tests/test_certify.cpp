#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "limper/bands.hpp"
#include "limper/certify.hpp"

using namespace limper;

TEST(Certify, ChebyshevNodes) {
  const std::vector<double> n = chebyshev_nodes(-1.0, 1.0, 3);
  ASSERT_EQ(n.size(), 3u);
  EXPECT_NEAR(n[0], -std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_NEAR(n[1], 0.0, 1e-15);
  EXPECT_NEAR(n[2], std::sqrt(3.0) / 2.0, 1e-15);
  const std::vector<double> m = chebyshev_nodes(2.0, 3.0, 33);
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_GT(m[i], 2.0);
    EXPECT_LT(m[i], 3.0);
    if (i > 0) EXPECT_LT(m[i - 1], m[i]);
  }
  EXPECT_TRUE(chebyshev_nodes(0.0, 1.0, 0).empty());
}

TEST(Certify, SampleEnergiesWithEdges) {
  const std::vector<Band> bands = {{0.0, 1.0}, {2.0, 3.0}};
  EXPECT_EQ(sample_energies(bands, 5, false).size(), 10u);
  const std::vector<double> e = sample_energies(bands, 5, true);
  ASSERT_EQ(e.size(), 14u);
  EXPECT_EQ(e.front(), 0.0);
  EXPECT_EQ(e.back(), 3.0);
}

TEST(Certify, SmallnessTarget) {
  EXPECT_DOUBLE_EQ(smallness_target(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(smallness_target(0, 1), 0.75);
  EXPECT_DOUBLE_EQ(smallness_target(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(smallness_target(1, 3), 0.25 + 0.125 + 0.0625);
  for (std::int64_t k = 0; k < 10; ++k) {
    for (std::int64_t l = 0; l <= k; ++l) EXPECT_LT(smallness_target(l, k), std::ldexp(1.0, -static_cast<int>(l)));
  }
}

TEST(Certify, PeriodGrowthOfFreePotential) {
  const PotentialRecipe zero = PotentialRecipe::constant(0.0);
  EXPECT_NEAR(period_growth(0.0, zero), 0.0, 1e-15);
  EXPECT_NEAR(period_growth(2.0, zero), std::log(1.0 + std::sqrt(2.0)), 1e-15);
  // Monodromy [[3,-1],[1,0]]: log of its spectral norm.
  EXPECT_NEAR(period_growth(3.0, zero), std::log((std::sqrt(11.0 + std::sqrt(117.0)) / std::sqrt(2.0))), 1e-12);
}

TEST(Certify, CertifySmallnessRowOnFreeBand) {
  const PotentialRecipe zero = PotentialRecipe::constant(0.0);
  const std::vector<Band> bands = band_edges_exact(zero).bands;
  const SmallnessMargin row = certify_smallness(zero, bands, true, 0, 0, {});
  EXPECT_EQ(row.target, 0.5);
  // The one-step monodromy norm peaks at the band edges, where it is 1 + sqrt 2.
  EXPECT_NEAR(row.sup, std::log(1.0 + std::sqrt(2.0)), 1e-9);
  EXPECT_FALSE(row.pass);
  const SmallnessMargin empty = certify_smallness(zero, {}, true, 0, 0, {});
  EXPECT_FALSE(empty.pass);
}

TEST(Certify, MinGrowthLengthExamples) {
  const PotentialRecipe zero = PotentialRecipe::constant(0.0);
  const std::vector<Band> bands = band_edges_exact(zero).bands;
  EXPECT_EQ(min_growth_length(zero, 2.0, bands).length, 1);
  const GrowthLength g = min_growth_length(zero, 0.01, bands);
  EXPECT_GT(g.length, 1);
  EXPECT_LE(g.achieved, 0.01 + 1e-12);
  EXPECT_EQ(g.length, g.remainder_factor << g.doubling_exponent);
  ASSERT_FALSE(g.transcript.empty());
  EXPECT_GT(g.transcript.front(), 0.01);
}

TEST(Certify, MinGrowthLengthMonotoneInTarget) {
  const PotentialRecipe r = PotentialRecipe::from_values({1.0, -0.5, 0.3});
  const std::vector<Band> bands = band_edges_exact(r).bands;
  std::int64_t last = 1;
  for (double mu : {1.0, 0.5, 0.25, 0.1, 0.05}) {
    const GrowthLength g = min_growth_length(r, mu, bands);
    EXPECT_GE(g.length, last) << mu;
    last = g.length;
  }
}
