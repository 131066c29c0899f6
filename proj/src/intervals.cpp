#include "limper/intervals.hpp"

#include <algorithm>
#include <cmath>

#include "limper/errors.hpp"

namespace limper {

bool is_eps_dense(const IntervalFamily& family, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("density parameter must be positive");
  // Admissible centers for I = (a, b) form the closed interval [b - eps, a + eps],
  // widened by a few ulps of the window so exact ties survive rounding.
  constexpr double kSlack = 1e-12;
  std::vector<std::pair<double, double>> centers;
  for (const OpenInterval& i : family.intervals) {
    const double lo = i.hi - eps - kSlack;
    const double hi = i.lo + eps + kSlack;
    if (lo <= hi) centers.emplace_back(lo, hi);
  }
  std::sort(centers.begin(), centers.end());
  double reach = -4.0;
  for (const auto& [lo, hi] : centers) {
    if (lo > reach) break;
    reach = std::max(reach, hi);
    if (reach >= 4.0) return true;
  }
  return false;
}

OpenInterval pick_subinterval(const OpenInterval& interval, double maxlen) {
  if (!(maxlen > 0.0)) throw InvalidArgument("maxlen must be positive");
  if (!(interval.lo < interval.hi)) throw InvalidArgument("interval must satisfy lo < hi");
  const double c = interval.center();
  const double half = 0.45 * std::min(interval.length(), maxlen);
  OpenInterval out{c - half, c + half};
  if (!(out.lo > interval.lo)) out.lo = std::nextafter(interval.lo, interval.hi);
  if (!(out.hi < interval.hi)) out.hi = std::nextafter(interval.hi, interval.lo);
  if (!(out.lo < out.hi)) out = {interval.lo, interval.hi};
  return out;
}

double min_length(const IntervalFamily& family) {
  if (family.intervals.empty()) throw EmptyFamily("min_length of an empty family");
  double m = family.intervals.front().length();
  for (const OpenInterval& i : family.intervals) m = std::min(m, i.length());
  return m;
}

double block_shift(std::int64_t j, std::int64_t k) {
  return std::ldexp(static_cast<double>(j), -static_cast<int>(k + 1));
}

NestingReport check_nesting(const IntervalFamily& child, const IntervalFamily& parent) {
  NestingReport report;
  const std::int64_t k = child.stage;
  std::vector<bool> covered(parent.intervals.size(), false);
  for (std::size_t c = 0; c < child.intervals.size(); ++c) {
    const OpenInterval& ci = child.intervals[c];
    for (std::size_t q = 0; q < parent.intervals.size(); ++q) {
      const OpenInterval& pi = parent.intervals[q];
      if (pi.lo <= ci.lo && ci.hi <= pi.hi) covered[q] = true;
    }
    bool placed = false;
    if (c < child.links.size()) {
      const ParentLink& link = child.links[c];
      if (link.parent >= 0 && static_cast<std::size_t>(link.parent) < parent.intervals.size()) {
        const OpenInterval sub = pick_subinterval(
            parent.intervals[static_cast<std::size_t>(link.parent)], std::ldexp(1.0, -static_cast<int>(k + 1)));
        const double s = block_shift(link.shift_index, k);
        placed = sub.lo + s <= ci.lo && ci.hi <= sub.hi + s;
      }
    }
    if (!placed) {
      report.children_inside_shifted_parents = false;
      report.misplaced_children.push_back(static_cast<std::int64_t>(c));
    }
  }
  for (std::size_t q = 0; q < covered.size(); ++q) {
    if (!covered[q]) {
      report.every_parent_has_child = false;
      report.orphan_parents.push_back(static_cast<std::int64_t>(q));
    }
  }
  return report;
}

bool verify_nesting(const IntervalFamily& child, const IntervalFamily& parent) {
  if (child.stage != parent.stage + 1) return false;
  return check_nesting(child, parent).ok();
}

std::vector<std::int64_t> chain_to_root(const std::vector<IntervalFamily>& families,
                                        std::size_t stage, std::int64_t index) {
  std::vector<std::int64_t> chain{index};
  for (std::size_t s = stage; s > 0; --s) {
    const IntervalFamily& f = families[s];
    const ParentLink& link = f.links.at(static_cast<std::size_t>(chain.back()));
    chain.push_back(link.parent);
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

}  // namespace limper
