#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "limper/config.hpp"
#include "limper/construct_discontinuity.hpp"
#include "limper/construct_generic.hpp"

namespace limper {

inline constexpr int kStageSchemaVersion = 1;

/// Everything needed to resume or re-verify a construction after stage
/// `stage`: the full history 0..stage and the configuration that built it.
struct StageFile {
  int schema = kStageSchemaVersion;
  char construction = 'A';
  ConstructionConfig config;
  /// Construction B only: the potential before normalization.
  std::optional<PotentialRecipe> original;
  std::vector<StageRecordA> history_a;
  std::vector<StageRecordB> history_b;

  std::int64_t stage() const;
};

struct LoadedStageFile {
  StageFile file;
  std::string stored_digest;
  std::string computed_digest;

  bool digest_ok() const { return stored_digest == computed_digest; }
};

std::uint64_t fnv1a64(std::string_view bytes);

/// Canonical text: a JSON document with sorted keys, doubles as hexfloat
/// strings and a trailing digest over the body.
std::string stage_file_text(const StageFile& file);
/// Throws FormatError on malformed input; a digest mismatch is reported,
/// not thrown.
LoadedStageFile parse_stage_file(const std::string& text);

void save_stage_file(const StageFile& file, const std::string& path);
LoadedStageFile load_stage_file(const std::string& path);

/// Recipe in the same encoding, for embedding or standalone files.
std::string recipe_text(const PotentialRecipe& recipe);
PotentialRecipe parse_recipe_text(const std::string& text);

}  // namespace limper
