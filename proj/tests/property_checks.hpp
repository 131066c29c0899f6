#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace props {

struct Result {
  std::string name;
  bool pass = false;
  std::int64_t cases = 0;
  double worst = 0.0;
  std::string detail;
};

Result cocycle_split(std::uint64_t seed, int cases = 200);
Result unit_determinant(std::uint64_t seed, int cases = 200);
Result bloch_window_norm(std::uint64_t seed, int offsets = 10, int energies = 20);
Result density_monotone(std::uint64_t seed, int cases = 300);
Result ids_monotone(std::uint64_t seed, int pairs = 200);

std::vector<Result> all(std::uint64_t seed);

}  // namespace props
