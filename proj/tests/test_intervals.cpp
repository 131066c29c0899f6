#include <gtest/gtest.h>

#include "generators.hpp"
#include "limper/errors.hpp"
#include "limper/intervals.hpp"

using namespace limper;

namespace {

IntervalFamily ladder() {
  IntervalFamily f;
  for (int i = -8; i <= 8; ++i) f.intervals.push_back({i / 2.0 - 0.05, i / 2.0 + 0.05});
  return f;
}

}  // namespace

TEST(Intervals, DensityExamples) {
  IntervalFamily one;
  one.intervals.push_back({-0.1, 0.1});
  EXPECT_TRUE(is_eps_dense(one, 4.1));
  EXPECT_FALSE(is_eps_dense(one, 3.0));
  EXPECT_FALSE(is_eps_dense(IntervalFamily{}, 10.0));
  EXPECT_TRUE(is_eps_dense(ladder(), 0.3));
  EXPECT_FALSE(is_eps_dense(ladder(), 0.05));
}

TEST(Intervals, DensityThresholdOfLadder) {
  // Worst E is midway between two centers, 0.25 + 0.05 from the far endpoint.
  EXPECT_TRUE(is_eps_dense(ladder(), 0.3));
  EXPECT_FALSE(is_eps_dense(ladder(), 0.2999));
  EXPECT_FALSE(is_eps_dense(ladder(), 0.2));
}

TEST(Intervals, AddingIntervalsKeepsDensity) {
  gen::Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    IntervalFamily f = ladder();
    const double eps = rng.uniform(0.15, 0.5);
    const bool before = is_eps_dense(f, eps);
    const double c = rng.uniform(-6.0, 6.0);
    f.intervals.push_back({c, c + rng.uniform(0.0, 0.2)});
    if (before) EXPECT_TRUE(is_eps_dense(f, eps));
  }
}

TEST(Intervals, PickSubintervalExamples) {
  const OpenInterval a = pick_subinterval({0.0, 1.0}, 0.25);
  EXPECT_NEAR(a.lo, 0.3875, 1e-15);
  EXPECT_NEAR(a.hi, 0.6125, 1e-15);
  const OpenInterval b = pick_subinterval({0.0, 0.1}, 1.0);
  EXPECT_NEAR(b.lo, 0.005, 1e-15);
  EXPECT_NEAR(b.hi, 0.095, 1e-15);
  const OpenInterval tiny = pick_subinterval({1.0, std::nextafter(1.0, 2.0)}, 1.0);
  EXPECT_LT(tiny.lo, tiny.hi);
}

TEST(Intervals, PickSubintervalStrictlyInside) {
  gen::Rng rng(32);
  for (int t = 0; t < 500; ++t) {
    const auto [lo, hi] = gen::ordered_pair(rng, -4.0, 4.0);
    if (!(lo < hi)) continue;
    const double maxlen = rng.uniform(1e-6, 2.0);
    const OpenInterval s = pick_subinterval({lo, hi}, maxlen);
    EXPECT_LT(s.length(), maxlen);
    EXPECT_LE(lo, s.lo);
    EXPECT_LE(s.hi, hi);
    EXPECT_LT(s.length(), hi - lo);
    EXPECT_NEAR(s.center(), 0.5 * (lo + hi), 1e-12);
  }
}

TEST(Intervals, MinLength) {
  IntervalFamily f;
  EXPECT_THROW(min_length(f), EmptyFamily);
  f.intervals = {{0.0, 0.2}, {1.0, 1.3}};
  EXPECT_NEAR(min_length(f), 0.2, 1e-15);
  f.intervals = {{0.0, 0.3}};
  EXPECT_NEAR(min_length(f), 0.3, 1e-15);
}

TEST(Intervals, NestingWithShiftsAndLinks) {
  IntervalFamily parent;
  parent.stage = 0;
  parent.intervals = {{-1.0, 0.0}, {1.0, 2.0}};
  IntervalFamily child;
  child.stage = 1;
  for (std::int64_t i = 0; i < 2; ++i) {
    const OpenInterval base = pick_subinterval(parent.intervals[static_cast<std::size_t>(i)], 0.25);
    child.intervals.push_back({base.lo + 0.01, base.hi - 0.01});
    child.links.push_back({i, 0});
    const double s = block_shift(-4, 1);
    child.intervals.push_back({base.lo + s + 0.01, base.hi + s - 0.01});
    child.links.push_back({i, -4});
  }
  EXPECT_TRUE(verify_nesting(child, parent));

  IntervalFamily missing = child;
  missing.intervals.resize(2);
  missing.links.resize(2);
  const NestingReport r = check_nesting(missing, parent);
  EXPECT_FALSE(r.every_parent_has_child);
  EXPECT_EQ(r.orphan_parents, std::vector<std::int64_t>{1});

  IntervalFamily moved = child;
  moved.intervals[1].hi += 0.5;
  EXPECT_FALSE(check_nesting(moved, parent).children_inside_shifted_parents);
}

TEST(Intervals, BlockShiftAndChains) {
  EXPECT_EQ(block_shift(-4, 1), -1.0);
  EXPECT_EQ(block_shift(3, 2), 0.375);
  std::vector<IntervalFamily> fams(3);
  fams[0].intervals = {{0, 1}, {2, 3}};
  fams[1].intervals = {{0.1, 0.2}, {2.1, 2.2}};
  fams[1].links = {{0, 0}, {1, 0}};
  fams[2].intervals = {{2.12, 2.13}};
  fams[2].links = {{1, 0}};
  EXPECT_EQ(chain_to_root(fams, 2, 0), (std::vector<std::int64_t>{1, 1, 0}));
}
