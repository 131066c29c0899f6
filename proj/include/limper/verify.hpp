#pragma once

#include <string>
#include <vector>

#include "limper/stage_io.hpp"

namespace limper {

/// One re-checked property of a stage file.
struct PropertyCheck {
  std::int64_t stage = -1;  // -1 for file-level checks
  std::string property;
  bool pass = false;
  std::string detail;
};

/// Re-runs every certification on the stored history without trusting the
/// stored reports.  The digest is checked first; a mismatch is recorded and
/// verification continues.
std::vector<PropertyCheck> verify_stage_file(const LoadedStageFile& loaded, int threads = 1);

bool all_pass(const std::vector<PropertyCheck>& checks);

}  // namespace limper
