#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "limper/bands.hpp"
#include "limper/construct_discontinuity.hpp"
#include "limper/construct_generic.hpp"
#include "limper/errors.hpp"
#include "limper/transfer.hpp"

using namespace limper;

TEST(ConstructDiscontinuity, NormalizeFreePotential) {
  const PotentialRecipe v = normalize_potential(PotentialRecipe::constant(0.0), 1.0);
  EXPECT_NEAR(v(0), 2.2, 1e-12);
  EXPECT_NEAR(spectrum_infimum(v), 0.2, 1e-12);
  const PotentialRecipe w = normalize_potential(PotentialRecipe::from_values({4.0, 0.0}), 0.5);
  EXPECT_NEAR(spectrum_infimum(w), 0.1, 1e-12);
  EXPECT_THROW(normalize_potential(PotentialRecipe::constant(0.0), 0.0), InvalidArgument);
}

TEST(ConstructDiscontinuity, LoweredLayout) {
  const PotentialRecipe prev = PotentialRecipe::constant(2.2);
  const PotentialRecipe low = build_lowered(prev, 5, 3, 2, 0.2);
  EXPECT_EQ(low.period(), 5 * (3 + 2));
  for (std::int64_t n = 0; n < 15; ++n) EXPECT_EQ(low(n), 2.2);
  for (std::int64_t n = 15; n < 25; ++n) EXPECT_NEAR(low(n), 2.2 - 0.08, 1e-15);
  EXPECT_THROW(build_lowered(prev, 5, 3, 0, 0.2), InvalidArgument);
  EXPECT_THROW(build_lowered(prev, 5, 3, 3, 0.2), InvalidArgument);
  EXPECT_THROW(build_lowered(prev, 0, 3, 1, 0.2), InvalidArgument);
}

TEST(ConstructDiscontinuity, EigenSplitClosedForm) {
  const HyperbolicSplitting s = eigen_split(0.0, PotentialRecipe::constant(2.2));
  const double mu = -1.1 - std::sqrt(1.21 - 1.0);
  EXPECT_EQ(s.sign, -1);
  EXPECT_NEAR(s.log_rate, std::log(-mu), 1e-14);
  // Monodromy [[-2.2,-1],[1,0]] has eigenvector (mu, 1) for eigenvalue mu.
  const double norm = std::hypot(mu, 1.0);
  EXPECT_NEAR(std::fabs(s.v[0]), -mu / norm, 1e-14);
  EXPECT_NEAR(std::fabs(s.v[1]), 1.0 / norm, 1e-14);
  EXPECT_NEAR(s.v[0] * s.v_perp[0] + s.v[1] * s.v_perp[1], 0.0, 1e-15);
  EXPECT_LE(s.residual_v, 1e-14);
  EXPECT_LE(s.residual_u, 1e-14);
  // v_perp = a v + b u.
  EXPECT_NEAR(s.a * s.v[0] + s.b * s.u[0], s.v_perp[0], 1e-14);
  EXPECT_NEAR(s.a * s.v[1] + s.b * s.u[1], s.v_perp[1], 1e-14);
}

TEST(ConstructDiscontinuity, EigenSplitRejectsEllipticEnergy) {
  EXPECT_THROW(eigen_split(2.2, PotentialRecipe::constant(2.2)), EllipticEnergy);
  EXPECT_THROW(eigen_split(0.0, PotentialRecipe::constant(0.0)), EllipticEnergy);
}

TEST(ConstructDiscontinuity, ChooseHWithIdentityLoweredBlock) {
  const ScaledMatrix2 plain = monodromy(0.0, PotentialRecipe::constant(2.2));
  const HChoice c = choose_h(plain, ScaledMatrix2::identity());
  EXPECT_EQ(c.h, 1);
  EXPECT_NEAR(c.q[0].value(), 1.0, 1e-14);
  EXPECT_NEAR(c.q[1].value(), 1.0, 1e-14);
}

TEST(ConstructDiscontinuity, ChooseHSatisfiesTraceIdentity) {
  gen::Rng rng(41);
  for (int t = 0; t < 30; ++t) {
    const double v = rng.uniform(2.1, 4.0);
    const PotentialRecipe prev = PotentialRecipe::from_values({v, v + rng.uniform(-0.05, 0.05)});
    const std::int64_t m0 = rng.integer(200, 5000);
    const HChoice c = choose_h(0.0, prev, m0, rng.uniform(0.01, 0.5));
    EXPECT_TRUE(c.identity_ok) << c.identity_residual;
    EXPECT_EQ(c.h, c.q[1].log_abs > c.q[0].log_abs ? 2 : 1);
  }
}

TEST(ConstructDiscontinuity, ZeroShiftKeepsBottom) {
  const PotentialRecipe prev = PotentialRecipe::constant(2.2);
  const PotentialRecipe same = build_lowered(prev, 50, 4, 1, 0.0);
  const BottomBracket b = check_bottom_bracket(same, 0.2);
  EXPECT_NEAR(b.e_new, 0.2, 1e-12);
  EXPECT_FALSE(b.ok);
}

TEST(ConstructDiscontinuity, FirstBandTop) {
  EXPECT_NEAR(first_band_top(PotentialRecipe::constant(2.2)), 4.2, 1e-12);
  EXPECT_NEAR(first_band_top(PotentialRecipe::from_values({4.0, 0.0})), 0.0, 1e-12);
}

TEST(ConstructDiscontinuity, OneStageRun) {
  ConstructionConfig config;
  config.stages = 1;
  config.threads = 1;
  const ConstructionResultB r = run_construction_b(PotentialRecipe::constant(0.0), config);
  ASSERT_TRUE(r.completed) << r.failure;
  ASSERT_EQ(r.stages.size(), 2u);
  const StageRecordB& s0 = r.stages[0];
  const StageRecordB& s1 = r.stages[1];
  EXPECT_NEAR(s0.e_k, 0.2, 1e-12);
  EXPECT_NEAR(s0.gamma, 0.5 * std::acosh(1.1), 1e-12);
  EXPECT_EQ(s1.m0, static_cast<std::int64_t>(std::floor(16.0 / (0.04 * 0.04))) + 1);
  EXPECT_GE(s1.e_k, 0.6 * s0.e_k - 1e-8);
  EXPECT_LE(s1.e_k, 0.8 * s0.e_k + 1e-8);
  EXPECT_TRUE(s1.report.ok());
  EXPECT_GE(s1.report.l0, 1.5 * s0.gamma - 1e-12);

  // Dirichlet ground state over three periods, interior lowered blocks.
  const std::vector<double> diag = s1.recipe.values(0, 3 * s1.period);
  const double trunc = oracle::lowest_eigenvalue(diag);
  EXPECT_GE(trunc, s1.e_k - 1e-9);
  EXPECT_LE(trunc - s1.e_k, 1e-6);

  for (const Band& b : s1.spectral_samples) EXPECT_TRUE(in_spectrum(0.5 * (b.alpha + b.beta), s1.recipe));
}
