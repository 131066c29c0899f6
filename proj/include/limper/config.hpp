#pragma once

#include <cstdint>
#include <string>

namespace limper {

enum class Mode { Strict, Capped };

/// Flat key=value configuration shared by both constructions.
struct ConstructionConfig {
  std::int64_t stages = 2;              // K
  std::int64_t L = 5;
  std::int64_t samples_per_band = 33;
  Mode mode = Mode::Strict;
  std::int64_t m0_cap = 4096;
  std::int64_t m_cap = std::int64_t{1} << 20;
  std::uint64_t seed = 20240901;
  double eps = 1.0;
  double resolution_floor = 1e-12;
  std::int64_t threads = 0;
  std::int64_t search_budget = 20000;
  std::int64_t spectral_samples = 4;

  bool operator==(const ConstructionConfig&) const = default;
};

/// Parses key=value lines; '#' starts a comment.  Unknown keys and malformed
/// values raise FormatError.
ConstructionConfig parse_config(const std::string& text);
ConstructionConfig load_config(const std::string& path);
/// Canonical text form; parse_config(config_text(c)) == c.
std::string config_text(const ConstructionConfig& config);

}  // namespace limper
