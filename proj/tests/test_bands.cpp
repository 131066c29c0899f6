#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "limper/bands.hpp"
#include "limper/errors.hpp"
#include "limper/transfer.hpp"

using namespace limper;

namespace {

const double kR2 = std::sqrt(2.0);

PotentialRecipe four_zero() { return PotentialRecipe::from_values({4.0, 0.0}); }

}  // namespace

TEST(Bands, ConstantPotentialIsShiftedFreeBand) {
  for (double c : {0.0, -1.5, 2.2}) {
    const BandList b = band_edges_exact(PotentialRecipe::constant(c));
    ASSERT_EQ(b.bands.size(), 1u);
    EXPECT_NEAR(b.bands[0].alpha, c - 2.0, 1e-12);
    EXPECT_NEAR(b.bands[0].beta, c + 2.0, 1e-12);
  }
}

TEST(Bands, PeriodTwoClosedForm) {
  const BandList b = band_edges_exact(four_zero());
  ASSERT_EQ(b.bands.size(), 2u);
  EXPECT_NEAR(b.bands[0].alpha, 2.0 - 2.0 * kR2, 1e-12);
  EXPECT_NEAR(b.bands[0].beta, 0.0, 1e-12);
  EXPECT_NEAR(b.bands[1].alpha, 4.0, 1e-12);
  EXPECT_NEAR(b.bands[1].beta, 2.0 + 2.0 * kR2, 1e-12);
  EXPECT_NEAR(spectrum_measure(b), 4.0 * kR2 - 4.0, 1e-12);
}

TEST(Bands, AgreeWithDiscriminantScan) {
  gen::Rng rng(21);
  for (int t = 0; t < 25; ++t) {
    const std::vector<double> v = gen::values(rng, 6, 3.0);
    const BandList b = band_edges_exact(PotentialRecipe::from_values(v));
    const std::vector<oracle::Interval> ref = oracle::bands_by_scan(v);
    ASSERT_EQ(b.bands.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_NEAR(b.bands[i].alpha, ref[i].lo, 1e-9);
      EXPECT_NEAR(b.bands[i].beta, ref[i].hi, 1e-9);
    }
  }
}

TEST(Bands, Invariants) {
  gen::Rng rng(22);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> v = gen::values(rng, 12, 3.0);
    const PotentialRecipe r = PotentialRecipe::from_values(v);
    const BandList b = band_edges_exact(r);
    const double vmax = std::fabs(*std::max_element(v.begin(), v.end(), [](double x, double y) {
      return std::fabs(x) < std::fabs(y);
    }));
    ASSERT_GE(b.bands.size(), 1u);
    ASSERT_LE(static_cast<std::int64_t>(b.bands.size()), r.period());
    EXPECT_LE(spectrum_measure(b), 4.0 + 1e-9);
    for (std::size_t i = 0; i < b.bands.size(); ++i) {
      const Band& x = b.bands[i];
      EXPECT_LT(x.alpha, x.beta);
      if (i + 1 < b.bands.size()) EXPECT_LT(x.beta, b.bands[i + 1].alpha);
      EXPECT_GE(x.alpha, -2.0 - vmax - 1e-12);
      EXPECT_LE(x.beta, 2.0 + vmax + 1e-12);
      EXPECT_NEAR(std::fabs(oracle::trace(x.alpha, v)), 2.0, 1e-6);
      EXPECT_NEAR(std::fabs(oracle::trace(x.beta, v)), 2.0, 1e-6);
      EXPECT_LE(std::fabs(oracle::trace(0.5 * (x.alpha + x.beta), v)), 2.0);
    }
  }
}

TEST(Bands, PeriodCap) {
  const PotentialRecipe big = PotentialRecipe::constant(0.0).with_overlay({5000, 1, {}});
  EXPECT_THROW(band_edges_exact(big), PeriodTooLarge);
}

TEST(Bands, LocalBandsExamples) {
  const BandList free = local_bands(PotentialRecipe::constant(0.0), -1.0, 1.0);
  ASSERT_EQ(free.bands.size(), 1u);
  EXPECT_EQ(free.bands[0].alpha, -1.0);
  EXPECT_EQ(free.bands[0].beta, 1.0);
  const BandList two = local_bands(four_zero(), -1.0, 1.0);
  ASSERT_EQ(two.bands.size(), 1u);
  EXPECT_NEAR(two.bands[0].alpha, 2.0 - 2.0 * kR2, 2e-12);
  EXPECT_NEAR(two.bands[0].beta, 0.0, 2e-12);
  EXPECT_EQ(two.unresolved, 0);
}

TEST(Bands, LocalBandsMatchExactInsideWindow) {
  gen::Rng rng(23);
  for (int t = 0; t < 30; ++t) {
    const PotentialRecipe r = gen::periodic(rng, 10, 3.0);
    const auto [lo, hi] = gen::ordered_pair(rng, -5.5, 5.5);
    const BandList local = local_bands(r, lo, hi);
    std::vector<Band> expect;
    for (const Band& b : band_edges_exact(r).bands) {
      const double a = std::max(b.alpha, lo), z = std::min(b.beta, hi);
      if (a < z) expect.push_back({a, z});
    }
    ASSERT_EQ(local.bands.size(), expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      EXPECT_NEAR(local.bands[i].alpha, expect[i].alpha, 1e-9);
      EXPECT_NEAR(local.bands[i].beta, expect[i].beta, 1e-9);
    }
  }
}

TEST(Bands, LocalBandsNeverEmitsUnresolvedCells) {
  // Deep wells of length 10: bands of width ~1e-10 below a coarse floor.
  const PotentialRecipe r = PotentialRecipe({{6.0, 10}, {-6.0, 10}});
  LocalBandOptions opts;
  opts.resolution_floor = 1e-3;
  const BandList b = local_bands(r, -8.0, 8.0, opts);
  EXPECT_GT(b.unresolved, 0);
  for (const Band& x : b.bands) {
    EXPECT_TRUE(in_spectrum(0.5 * (x.alpha + x.beta), r));
    EXPECT_EQ(band_position(x.alpha, r).label, band_position(x.beta, r).label);
  }
}

TEST(Bands, MembershipAndDistance) {
  const PotentialRecipe zero = PotentialRecipe::constant(0.0);
  EXPECT_TRUE(in_spectrum(0.0, zero));
  EXPECT_FALSE(in_spectrum(2.5, zero));
  EXPECT_FALSE(in_spectrum(2.0, four_zero()));
  EXPECT_NEAR(dist_to_spectrum(2.5, zero, 4.0), 0.5, 1e-12);
  EXPECT_EQ(dist_to_spectrum(0.0, zero, 4.0), 0.0);
  EXPECT_NEAR(dist_to_spectrum(2.0, four_zero(), 4.0), 2.0, 1e-12);
  EXPECT_TRUE(std::isinf(dist_to_spectrum(10.0, zero, 1.0)));
}

TEST(Bands, SpectrumInfimum) {
  EXPECT_NEAR(spectrum_infimum(PotentialRecipe::constant(0.0)), -2.0, 1e-12);
  EXPECT_NEAR(spectrum_infimum(PotentialRecipe::constant(0.7)), -1.3, 1e-12);
  EXPECT_NEAR(spectrum_infimum(four_zero()), 2.0 - 2.0 * kR2, 1e-12);
}

TEST(Bands, SpectrumInfimumMatchesTruncationOracle) {
  gen::Rng rng(24);
  for (int t = 0; t < 10; ++t) {
    const PotentialRecipe r = gen::staged(rng, 3000);
    const double bottom = spectrum_infimum(r);
    const double trunc = oracle::lowest_eigenvalue(r.values(0, 40 * r.period()));
    // Dirichlet truncations sit above the infimum and converge to it.
    EXPECT_GE(trunc, bottom - 1e-12);
    EXPECT_LE(trunc - bottom, 1e-6);
  }
}

TEST(Bands, MeasureExamples) {
  EXPECT_NEAR(spectrum_measure(band_edges_exact(PotentialRecipe::constant(0.0))), 4.0, 1e-12);
  EXPECT_EQ(spectrum_measure(BandList{}), 0.0);
}

TEST(Bands, IdsExamples) {
  const PotentialRecipe zero = PotentialRecipe::constant(0.0);
  EXPECT_NEAR(ids(0.0, zero), 0.5, 1e-12);
  EXPECT_NEAR(ids(-2.0, zero), 0.0, 1e-12);
  EXPECT_NEAR(ids(2.0, four_zero()), 0.5, 1e-12);
  EXPECT_EQ(ids(-10.0, four_zero()), 0.0);
  EXPECT_EQ(ids(10.0, four_zero()), 1.0);
}

TEST(Bands, IdsMatchesTruncationCounting) {
  gen::Rng rng(25);
  const std::int64_t size = 4096;
  for (int t = 0; t < 5; ++t) {
    const std::vector<double> v = gen::values(rng, 8, 3.0);
    const PotentialRecipe r = PotentialRecipe::from_values(v);
    const std::vector<double> diag = r.values(0, size);
    for (int i = 0; i < 50; ++i) {
      const double e = rng.uniform(-5.5, 5.5);
      const double counted = static_cast<double>(oracle::sturm_count(e, diag)) / static_cast<double>(size);
      EXPECT_LE(std::fabs(ids(e, r) - counted), 2.0 / static_cast<double>(size)) << e;
    }
  }
}

TEST(Bands, ThoulessExamples) {
  const PotentialRecipe zero = PotentialRecipe::constant(0.0);
  EXPECT_NEAR(thouless_lyapunov(3.0, zero), 0.9624236501192069, 1e-4);
  EXPECT_NEAR(thouless_lyapunov(0.0, zero), 0.0, 1e-4);
}

TEST(Bands, ThoulessMatchesTraceFormula) {
  gen::Rng rng(26);
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> v = gen::values(rng, 6, 3.0);
    const PotentialRecipe r = PotentialRecipe::from_values(v);
    const BandList b = band_edges_exact(r);
    int done = 0;
    while (done < 20) {
      const double e = rng.uniform(-6.0, 6.0);
      if (oracle::distance_to_union(e, b.bands) < 1e-3) continue;
      EXPECT_NEAR(thouless_lyapunov(e, r), oracle::periodic_lyapunov(e, v), 1e-4);
      ++done;
    }
  }
}

TEST(Bands, TruncatedEigenvalues) {
  const std::vector<double> ev = truncated_eigenvalues(PotentialRecipe::constant(0.0), 3);
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_NEAR(ev[0], -kR2, 1e-14);
  EXPECT_NEAR(ev[1], 0.0, 1e-14);
  EXPECT_NEAR(ev[2], kR2, 1e-14);
  const std::vector<double> shifted = truncated_eigenvalues(PotentialRecipe::constant(1.5), 3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(shifted[i], ev[i] + 1.5, 1e-14);
  gen::Rng rng(27);
  const std::vector<double> v = gen::values(rng, 9, 3.0);
  const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
  for (double e : truncated_eigenvalues(PotentialRecipe::from_values(v), 500)) {
    EXPECT_GE(e, lo - 2.0 - 1e-12);
    EXPECT_LE(e, hi + 2.0 + 1e-12);
  }
  EXPECT_THROW(truncated_eigenvalues(PotentialRecipe::constant(0.0), 0), InvalidArgument);
}
