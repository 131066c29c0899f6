#pragma once

// Seeded generators for the property and acceptance suites.

#include <cstdint>
#include <random>
#include <vector>

#include "limper/potential.hpp"

namespace gen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  bool coin() { return integer(0, 1) == 1; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline std::vector<double> values(Rng& rng, std::int64_t max_period, double amplitude) {
  std::vector<double> v(static_cast<std::size_t>(rng.integer(1, max_period)));
  for (double& x : v) x = rng.uniform(-amplitude, amplitude);
  return v;
}

inline limper::PotentialRecipe periodic(Rng& rng, std::int64_t max_period, double amplitude) {
  return limper::PotentialRecipe::from_values(values(rng, max_period, amplitude));
}

/// Step base plus up to three overlays with dyadic shifts, period <= max_period.
inline limper::PotentialRecipe staged(Rng& rng, std::int64_t max_period) {
  std::vector<limper::StepRun> base;
  const auto runs = rng.integer(1, 4);
  for (std::int64_t i = 0; i < runs; ++i) base.push_back({rng.uniform(-2.0, 2.0), rng.integer(1, 5)});
  limper::PotentialRecipe r(base);
  const auto levels = rng.integer(1, 3);
  for (std::int64_t l = 0; l < levels; ++l) {
    limper::StageOverlay ov;
    ov.refinement = rng.integer(1, 40);
    ov.copies = rng.integer(1, 6);
    const auto shifts = rng.integer(0, 8);
    for (std::int64_t j = 0; j < shifts; ++j) {
      ov.shifts.push_back(std::ldexp(static_cast<double>(rng.integer(-4, 3)), -static_cast<int>(l + 2)));
    }
    const std::int64_t blocks = ov.copies + static_cast<std::int64_t>(ov.shifts.size());
    if (r.period() * ov.refinement * blocks > max_period) break;
    r = r.with_overlay(ov);
  }
  return r;
}

/// Ordered pair a < b inside [lo, hi].
inline std::pair<double, double> ordered_pair(Rng& rng, double lo, double hi) {
  double a = rng.uniform(lo, hi), b = rng.uniform(lo, hi);
  if (b < a) std::swap(a, b);
  return {a, b};
}

}  // namespace gen
