#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace limper {

struct OpenInterval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double e) const { return lo < e && e < hi; }
  bool operator==(const OpenInterval&) const = default;
};

/// Parent index in the previous family plus the block index j whose shift
/// j/2^{k+1} moved the parent's subinterval onto this one.
struct ParentLink {
  std::int64_t parent = 0;
  std::int64_t shift_index = 0;

  bool operator==(const ParentLink&) const = default;
};

struct IntervalFamily {
  std::int64_t stage = 0;
  std::vector<OpenInterval> intervals;
  /// Empty for stage 0, otherwise one link per interval.
  std::vector<ParentLink> links;

  bool operator==(const IntervalFamily&) const = default;
};

/// True iff every E in [-4, 4] has some member inside [E - eps, E + eps].
bool is_eps_dense(const IntervalFamily& family, double eps);

/// Concentric open subinterval of length 0.9 * min(|I|, maxlen).
OpenInterval pick_subinterval(const OpenInterval& interval, double maxlen);

/// Smallest length; throws EmptyFamily.
double min_length(const IntervalFamily& family);

/// Outcome of the two nesting checks between consecutive stages.
struct NestingReport {
  bool every_parent_has_child = true;
  bool children_inside_shifted_parents = true;
  std::vector<std::int64_t> orphan_parents;
  std::vector<std::int64_t> misplaced_children;

  bool ok() const { return every_parent_has_child && children_inside_shifted_parents; }
};

/// Checks that each parent interval contains a child and that each child
/// lies in pick_subinterval(parent, 2^{-(k+1)}) + j/2^{k+1}, k the child stage.
NestingReport check_nesting(const IntervalFamily& child, const IntervalFamily& parent);
bool verify_nesting(const IntervalFamily& child, const IntervalFamily& parent);

/// Shift j / 2^{k+1} used at stage k.
double block_shift(std::int64_t j, std::int64_t k);

/// Follows parent links from `index` in families[stage] back to stage 0.
/// Returns the indices from stage 0 upwards.
std::vector<std::int64_t> chain_to_root(const std::vector<IntervalFamily>& families,
                                        std::size_t stage, std::int64_t index);

}  // namespace limper
