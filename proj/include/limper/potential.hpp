#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace limper {

/// A run of `length` consecutive sites carrying the same potential value.
struct StepRun {
  double value = 0.0;
  std::int64_t length = 1;

  bool operator==(const StepRun&) const = default;
};

/// One level of the overlay stack.  The previous period P is first repeated
/// `refinement` times, giving a block of length refinement * P.  The new period
/// then consists of `copies` unshifted blocks followed by one block per entry
/// of `shifts`, block i carrying the additive shift shifts[i].
struct StageOverlay {
  std::int64_t refinement = 1;
  std::int64_t copies = 1;
  std::vector<double> shifts;

  bool operator==(const StageOverlay&) const = default;
};

/// Periodic potential given by a step base plus a stack of overlays.  Every
/// query costs O(depth) and never touches a materialized period.
class PotentialRecipe {
 public:
  PotentialRecipe();
  explicit PotentialRecipe(std::vector<StepRun> base);

  static PotentialRecipe constant(double c);
  /// One run per entry, each of length 1.
  static PotentialRecipe from_values(const std::vector<double>& values);

  /// Returns a copy with `overlay` pushed on top.  Throws PeriodOverflow when
  /// the new period exceeds 2^62, InvalidArgument on zero counts.
  PotentialRecipe with_overlay(const StageOverlay& overlay) const;
  /// The recipe made of the base and the first `levels` overlays.
  PotentialRecipe truncated(std::size_t levels) const;
  /// Drops trailing overlays without shifts.  They only repeat the period,
  /// so the operator and its spectrum are unchanged.
  PotentialRecipe without_trailing_repeats() const;
  /// Same recipe with c added to every value.
  PotentialRecipe shifted(double c) const;

  const std::vector<StepRun>& base() const { return base_; }
  const std::vector<StageOverlay>& overlays() const { return overlays_; }
  std::size_t depth() const { return overlays_.size(); }

  std::int64_t period() const { return periods_.back(); }
  /// Period after `levels` overlays; level_period(0) is the base period.
  std::int64_t level_period(std::size_t levels) const { return periods_[levels]; }

  /// V(n) for any integer n.
  double operator()(std::int64_t n) const;
  /// V(start), ..., V(start + count - 1).
  std::vector<double> values(std::int64_t start, std::int64_t count) const;

  double max_value() const;
  double min_value() const;
  double sup_norm() const;

  bool operator==(const PotentialRecipe& other) const {
    return base_ == other.base_ && overlays_ == other.overlays_;
  }

 private:
  void rebuild();
  double base_value(std::int64_t r) const;

  std::vector<StepRun> base_;
  std::vector<StageOverlay> overlays_;
  std::vector<std::int64_t> periods_;
  std::vector<std::int64_t> run_starts_;
};

double eval_potential(const PotentialRecipe& recipe, std::int64_t n);

/// Parses "v0,v1,..." into a recipe with unit runs.
PotentialRecipe parse_inline_potential(const std::string& text);

}  // namespace limper
