#include <cmath>

#include <gtest/gtest.h>

#include "limper/bands.hpp"
#include "limper/construct_generic.hpp"
#include "limper/errors.hpp"
#include "limper/intervals.hpp"

using namespace limper;

TEST(ConstructGeneric, StepPotential) {
  const PotentialRecipe s = step_potential(5);
  EXPECT_EQ(s.period(), 10);
  EXPECT_EQ(s(0), 2.0);
  EXPECT_EQ(s(4), 2.0);
  EXPECT_EQ(s(5), -2.0);
  EXPECT_EQ(s(9), -2.0);
  EXPECT_EQ(s(-1), -2.0);
  EXPECT_THROW(step_potential(0), InvalidArgument);
}

TEST(ConstructGeneric, InitialStageIsDense) {
  ConstructionConfig config;
  config.threads = 1;
  const StageRecordA rec = initial_stage(5, 0.5, config);
  EXPECT_EQ(rec.k, 0);
  EXPECT_TRUE(is_eps_dense(rec.sigma, 1.0));
  EXPECT_EQ(rec.period % 10, 0);
  EXPECT_EQ(rec.period, rec.recipe.period());
  EXPECT_LE(rec.growth.achieved, 0.5);
  EXPECT_DOUBLE_EQ(rec.delta, min_length(rec.sigma));
  for (const OpenInterval& i : rec.sigma.intervals) {
    EXPECT_TRUE(in_spectrum(i.center(), rec.recipe));
  }
  EXPECT_THROW(initial_stage(4, 0.5, config), InvalidArgument);
}

TEST(ConstructGeneric, LongStepSpectrumFillsTwoIntervals) {
  const PotentialRecipe s = step_potential(25);
  for (int i = 0; i <= 20; ++i) {
    const double e = -2.0 + 0.2 * i;
    EXPECT_LE(dist_to_spectrum(e + 2.0, s, 4.0), 0.4) << e;
    EXPECT_LE(dist_to_spectrum(e - 2.0, s, 4.0), 0.4) << e;
  }
}

TEST(ConstructGeneric, ChooseM0) {
  EXPECT_EQ(choose_m0(0.25), 257);
  EXPECT_EQ(choose_m0(4.0), 2);
  EXPECT_EQ(choose_m0(0.1), 1601);
  for (double d : {0.013, 0.37, 1.9}) {
    const std::int64_t m0 = choose_m0(d);
    EXPECT_GT(2.0 / std::sqrt(static_cast<double>(m0)), 0.0);
    EXPECT_LT(2.0 / std::sqrt(static_cast<double>(m0)), d / 2.0);
  }
  EXPECT_THROW(choose_m0(0.0), InvalidArgument);
  EXPECT_THROW(choose_m0(1e-9), PeriodOverflow);
}

TEST(ConstructGeneric, HatPotentialLayout) {
  StageRecordA prev;
  prev.recipe = PotentialRecipe::from_values({1.0, -1.0});
  const std::int64_t m0 = 3, m = 2, k = 1;
  const PotentialRecipe hat = build_hat_potential(prev, m0, m, k);
  const std::int64_t block = m0 * 2;
  EXPECT_EQ(hat.period(), block * (m + 8));
  for (std::int64_t n = 0; n < m * block; ++n) EXPECT_EQ(hat(n), prev.recipe(n));
  for (std::int64_t j = -4; j <= 3; ++j) {
    const std::int64_t start = (m + j + 4) * block;
    for (std::int64_t n = start; n < start + block; ++n) {
      EXPECT_DOUBLE_EQ(hat(n), prev.recipe(n) + j / 4.0) << j;
    }
  }
  EXPECT_THROW(build_hat_potential(prev, 0, 1, 1), InvalidArgument);
}

TEST(ConstructGeneric, TrialResidualBelowBound) {
  const PotentialRecipe prev = step_potential(5).with_overlay({1, 7, {}});
  const std::int64_t m0 = 257;
  StageRecordA rec;
  rec.recipe = prev;
  const PotentialRecipe hat = build_hat_potential(rec, m0, 1, 1);
  const std::vector<Band> bands = band_edges_exact(step_potential(5)).bands;
  for (const Band& b : bands) {
    for (std::int64_t j : {-4, 0, 3}) {
      const TrialResidual r = trial_vector_residual(hat, prev, 0.5 * (b.alpha + b.beta), j, 1, 1, m0);
      EXPECT_DOUBLE_EQ(r.bound, 2.0 / std::sqrt(257.0));
      EXPECT_LE(r.residual, r.bound);
      EXPECT_TRUE(r.pass);
      EXPECT_EQ(r.nonzero_sites, 4);
    }
  }
}

TEST(ConstructGeneric, FindsBandNearFreeShiftedCenter) {
  StageRecordA prev;
  prev.recipe = PotentialRecipe::constant(0.0);
  const PotentialRecipe hat = build_hat_potential(prev, 2, 1, 0);
  const OpenInterval interval{-0.5, 0.5};
  for (std::int64_t j = -4; j <= 3; ++j) {
    const OpenInterval band = find_band_in_shifted_interval(hat, interval, j, 0);
    const double s = block_shift(j, 0);
    EXPECT_GE(band.lo, interval.lo + s);
    EXPECT_LE(band.hi, interval.hi + s);
    EXPECT_GT(band.length(), 1e-12);
    EXPECT_TRUE(in_spectrum(band.center(), hat));
  }
}

TEST(ConstructGeneric, AsBands) {
  IntervalFamily f;
  f.intervals = {{0.0, 1.0}, {2.0, 2.5}};
  const std::vector<Band> b = as_bands(f);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[1].alpha, 2.0);
  EXPECT_EQ(b[1].beta, 2.5);
}
