#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "limper/potential.hpp"

namespace limper {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerification = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `limper` tool; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Resolves --potential: a stage file (last stage), a recipe file, a file of
/// numbers, or an inline comma list.  Throws FormatError.
PotentialRecipe load_potential(const std::string& source);

}  // namespace limper
