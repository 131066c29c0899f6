#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "limper/bands.hpp"
#include "limper/certify.hpp"
#include "limper/config.hpp"
#include "limper/potential.hpp"
#include "limper/scaled_matrix.hpp"

namespace limper {

/// Expanding and contracting eigendirections of a hyperbolic transfer
/// matrix, with v_perp = a v + b u.
struct HyperbolicSplitting {
  std::array<double, 2> v{};
  std::array<double, 2> u{};
  std::array<double, 2> v_perp{};
  double a = 0.0;
  double b = 0.0;
  /// log of the expanding eigenvalue modulus (p L(E) for a period-p matrix).
  double log_rate = 0.0;
  /// Common sign of the two eigenvalues.
  int sign = 1;
  double residual_v = 0.0;
  double residual_u = 0.0;
};

HyperbolicSplitting eigen_split(const ScaledMatrix2& m);
/// Splitting of the period transfer matrix; throws EllipticEnergy for |tr| <= 2.
HyperbolicSplitting eigen_split(double energy, const PotentialRecipe& recipe);

/// Result of the Cayley-Hamilton selection of the number of lowered blocks.
struct HChoice {
  int h = 1;
  std::array<LogValue, 2> q{};
  LogValue trace_lowered;
  double identity_residual = 0.0;
  bool identity_ok = false;
  HyperbolicSplitting split;
};

inline constexpr double kIdentityTolerance = 1e-6;

/// q_h = <v, B^h v> + a <v_perp, B^h v> for B = `lowered`, with v, a from the
/// splitting of `plain`; h maximizes |q_h|.
HChoice choose_h(const ScaledMatrix2& plain, const ScaledMatrix2& lowered);
/// Same at energy E for the m0-fold period of prev and of prev - shift.
HChoice choose_h(double energy, const PotentialRecipe& prev, std::int64_t m0, double shift);

PotentialRecipe normalize_potential(const PotentialRecipe& v0, double eps);

/// m copies of the m0-fold period of prev, then h blocks lowered by 2 E0 / 5.
PotentialRecipe build_lowered(const PotentialRecipe& prev, std::int64_t m0, std::int64_t m, int h, double e0);

struct BottomBracket {
  double e_new = 0.0;
  bool ok = false;
};

/// inf sigma(hat) and whether it lies in [3 E0 / 5, 4 E0 / 5] (1e-8 slack).
BottomBracket check_bottom_bracket(const PotentialRecipe& hat, double e0);

/// Right edge of the lowest band.
double first_band_top(const PotentialRecipe& recipe);

struct VerificationReportB {
  bool prefix_ok = true;
  double sup_change = 0.0;
  double sup_change_bound = 0.0;
  bool change_ok = true;
  double e_k = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool bracket_ok = true;
  bool step_bracket_ok = true;
  double trial_energy = 0.0;
  double bottom_distance = 0.0;
  bool bottom_distance_ok = true;
  double l0 = 0.0;
  double l0_target = 0.0;
  double l0_asymptotic = 0.0;
  double l0_trace_bound = 0.0;
  bool l0_ok = true;
  std::vector<SmallnessMargin> smallness;
  bool identity_ok = true;
  std::vector<std::string> transcript;

  bool ok() const;
};

struct StageRecordB {
  std::int64_t k = 0;
  PotentialRecipe recipe;
  std::int64_t period = 0;
  double e_k = 0.0;
  double gamma = 0.0;
  std::int64_t m0 = 1;
  std::int64_t m = 0;
  int h = 0;
  std::int64_t multiplier = 1;
  double delta = 0.0;
  HChoice choice;
  GrowthLength growth;
  /// Resolvable bands of sigma(V^k) just above its bottom, used as the
  /// energy sample for the smallness property.
  std::vector<Band> spectral_samples;
  VerificationReportB report;
};

/// Lowest `count` bands wider than `min_width`, scanning upward from `from`
/// with geometrically growing offsets.
std::vector<Band> find_spectral_samples(const PotentialRecipe& recipe, double from, double scale,
                                        std::int64_t count, double min_width, std::int64_t budget);

/// L(0, V^k) against (2 - sum_{s<=k} 2^{-s}) gamma for every stage.
std::vector<VerificationReportB> verify_L0_growth(const std::vector<StageRecordB>& history);

std::vector<SmallnessMargin> verify_smallness_on_spectra_b(const std::vector<StageRecordB>& history,
                                                           std::int64_t k, std::int64_t samples_per_band,
                                                           int threads = 1);

/// Checks (i), (ii), the bracket and L(0) of history[k] against history[k-1].
void check_stage_b(const std::vector<StageRecordB>& history, std::int64_t k, VerificationReportB& report);

struct SweepRow {
  double energy = 0.0;
  double lyapunov = 0.0;
  bool in_spectrum = false;
};

struct DiscontinuityReport {
  double gamma = 0.0;
  double e0 = 0.0;
  double l0 = 0.0;
  double l0_target = 0.0;
  bool l0_ok = false;
  /// Per stage k = 1..K: max and min over sigma(V^k) samples of the growth
  /// at p_K, and the target sum_{s=k+1}^{K+1} 2^{-s}.
  std::vector<SmallnessMargin> rows;
  std::vector<double> row_minima;
  /// min over the stage-K samples of the growth at p_K.
  double bottom_min = 0.0;
  double bottom_energy = 0.0;
  double telescoped = 0.0;
  double telescoped_bound = 0.0;
  bool telescoped_ok = false;
  bool monotone_below_zero = false;
  /// Offset restoring the original potential: V = V^K + offset.
  double offset = 0.0;
  double distance_to_original = 0.0;
  std::vector<SweepRow> sweep;

  bool ok() const;
};

struct ConstructionResultB {
  std::vector<StageRecordB> stages;
  bool completed = false;
  std::string failure;
  StageRecordB failed_stage;
  DiscontinuityReport report;
};

DiscontinuityReport discontinuity_report(const std::vector<StageRecordB>& history, double offset,
                                         const ConstructionConfig& config, std::int64_t sweep_points = 241);

/// Stages history.size() .. config.stages for the original potential v0.
ConstructionResultB run_construction_b(const PotentialRecipe& v0, const ConstructionConfig& config,
                                       std::vector<StageRecordB> history = {});

}  // namespace limper
