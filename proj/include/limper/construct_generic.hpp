#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "limper/bands.hpp"
#include "limper/certify.hpp"
#include "limper/config.hpp"
#include "limper/intervals.hpp"
#include "limper/potential.hpp"

namespace limper {

/// Residual of the windowed Bloch trial vector on one shifted block.
struct TrialResidual {
  std::int64_t interval = 0;
  std::int64_t j = 0;
  double energy = 0.0;
  double residual = 0.0;   // ||(H - E - shift) phi|| / ||phi||
  double bound = 0.0;      // 2 / sqrt(m0)
  double norm = 0.0;       // ||phi||
  std::int64_t nonzero_sites = 0;
  std::int64_t sites_checked = 0;
  bool exhaustive = false;
  bool pass = false;
};

/// Outcome of the band search inside one shifted window I + j/2^{k+1}.
struct WindowSearch {
  std::int64_t interval = 0;
  std::int64_t j = 0;
  OpenInterval window;
  bool found = false;
  OpenInterval band;
  /// Distance from the shifted center to the spectrum (label bisection).
  double center_distance = 0.0;
  std::int64_t unresolved = 0;
  std::int64_t evaluations = 0;
};

struct VerificationReportA {
  bool property_i = true;
  double sup_change = 0.0;
  double sup_change_bound = 0.0;
  bool property_ii = true;
  std::int64_t prefix_checks = 0;
  bool density = true;
  bool nesting = true;
  std::vector<SmallnessMargin> smallness;
  std::vector<TrialResidual> residuals;
  std::vector<WindowSearch> searches;
  /// max over samples of finite_lyapunov at p_k * 2^i, i = 0..3 (not asserted).
  std::vector<double> longer_lengths;
  std::int64_t membership_failures = 0;
  std::string note;

  bool ok() const;
};

struct StageRecordA {
  std::int64_t k = 0;
  PotentialRecipe recipe;
  std::int64_t period = 0;
  IntervalFamily sigma;
  std::int64_t m0 = 1;
  std::int64_t m = 0;
  std::int64_t multiplier = 1;
  double delta = 0.0;
  GrowthLength growth;
  VerificationReportA report;
};

/// Two-valued step potential of period 2L: +2 on [0, L-1], -2 on [L, 2L-1].
PotentialRecipe step_potential(std::int64_t L);

/// Stage 0: the step potential, Sigma_0 from its band interiors, repeated so
/// that the growth bound mu_target holds on its spectrum.
StageRecordA initial_stage(std::int64_t L, double mu_target, const ConstructionConfig& config);

/// Smallest m0 with delta * sqrt(m0) > 4.
std::int64_t choose_m0(double delta);

/// prev refined m0 times, m plain copies, then eight blocks shifted by
/// j/2^{k+1} for j = -4..3.
PotentialRecipe build_hat_potential(const StageRecordA& prev, std::int64_t m0, std::int64_t m,
                                    std::int64_t k);

TrialResidual trial_vector_residual(const PotentialRecipe& hat, const PotentialRecipe& prev,
                                    double e_hat, std::int64_t j, std::int64_t k, std::int64_t m,
                                    std::int64_t m0, std::uint64_t seed = 1);

/// Open piece of a band of `hat` inside I + j/2^{k+1}; throws NoBandFound.
OpenInterval find_band_in_shifted_interval(const PotentialRecipe& hat, const OpenInterval& interval,
                                           std::int64_t j, std::int64_t k,
                                           const LocalBandOptions& options = {});
WindowSearch search_shifted_interval(const PotentialRecipe& hat, const OpenInterval& interval,
                                     std::int64_t j, std::int64_t k, const LocalBandOptions& options);

std::vector<Band> as_bands(const IntervalFamily& family);

/// Doubling search for m; the smallness rows l < k are checked on the hat
/// potential.  In capped mode the cap is returned when nothing passes.
std::int64_t choose_m_for_stage(const std::vector<StageRecordA>& history, std::int64_t m0, std::int64_t k,
                                const ConstructionConfig& config, std::vector<std::string>* transcript = nullptr);

/// Smallness rows l = 1..k for history[k].
std::vector<SmallnessMargin> verify_property_iii(const std::vector<StageRecordA>& history, std::int64_t k,
                                                 std::int64_t samples_per_band, int threads = 1);

/// Re-checks properties (i), (ii), (iv), (v) of history[k] against history[k-1].
void check_structure(const std::vector<StageRecordA>& history, std::int64_t k, std::uint64_t seed,
                     VerificationReportA& report);

struct ConstructionResultA {
  std::vector<StageRecordA> stages;
  bool completed = false;
  std::string failure;
  /// Diagnostics of the stage that failed, if any.
  StageRecordA failed_stage;
};

/// Builds stages history.size() .. config.stages, starting from scratch when
/// history is empty.
ConstructionResultA run_construction_a(const ConstructionConfig& config,
                                       std::vector<StageRecordA> history = {});

}  // namespace limper
