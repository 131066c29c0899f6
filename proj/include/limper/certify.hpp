#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "limper/bands.hpp"
#include "limper/potential.hpp"

namespace limper {

/// Interior Chebyshev nodes of the first kind on [lo, hi], ascending.
std::vector<double> chebyshev_nodes(double lo, double hi, int count);

/// Energy-sampling policy for sup-over-spectrum checks.
struct SamplingPolicy {
  int nodes_per_band = 33;
  int max_nodes_per_band = 1056;
  double convergence = 1e-8;
  int threads = 1;
};

/// Sample energies: Chebyshev nodes on every band, plus both ends when
/// `with_edges` is set.
std::vector<double> sample_energies(const std::vector<Band>& bands, int nodes, bool with_edges);

struct SampledSup {
  double sup = 0.0;
  double argmax = 0.0;
  std::int64_t samples = 0;
  int nodes_per_band = 0;
  bool converged = false;
};

/// max of f over sample_energies, doubling the node count until the maximum
/// moves by less than policy.convergence.
SampledSup sampled_sup(const std::vector<Band>& bands, bool with_edges,
                       const std::function<double(double)>& f, const SamplingPolicy& policy);

/// (1/N) log ||A_N(E)|| with N = recipe.period().
double period_growth(double energy, const PotentialRecipe& recipe);

/// Target sum_{s=l+1}^{k+1} 2^{-s} of the smallness property.
double smallness_target(std::int64_t l, std::int64_t k);

/// One row of a sup-over-spectrum certificate.
struct SmallnessMargin {
  std::int64_t l = 0;
  double sup = 0.0;
  double target = 0.0;
  double argmax = 0.0;
  std::int64_t samples = 0;
  bool converged = false;
  bool pass = false;

  double margin() const { return target - sup; }
};

inline constexpr double kSmallnessTolerance = 1e-6;

/// Checks (1/p_k) log ||A_{p_k}(E, recipe)|| <= target(l, k) on the sample
/// bands of stage l.
SmallnessMargin certify_smallness(const PotentialRecipe& recipe, const std::vector<Band>& sample_bands,
                                  bool with_edges, std::int64_t l, std::int64_t k,
                                  const SamplingPolicy& policy);

/// Result of the doubling search for a length beyond which finite-size
/// growth stays below mu on the sample set.
struct GrowthLength {
  std::int64_t length = 1;  // M = M2 * 2^M1
  int doubling_exponent = 0;  // M1
  std::int64_t remainder_factor = 1;  // M2
  bool exact_remainder = false;
  double achieved = 0.0;  // max f_{M1} over samples
  std::vector<double> transcript;  // max f_i for i = 0, 1, ...
};

/// Throws StageFailure when no i <= max_exponent works; the message carries
/// the best value reached.
GrowthLength min_growth_length(const PotentialRecipe& recipe, double mu, const std::vector<Band>& bands,
                               const SamplingPolicy& policy = {}, int max_exponent = 61);

}  // namespace limper
