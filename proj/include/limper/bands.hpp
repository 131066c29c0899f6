#pragma once

#include <cstdint>
#include <vector>

#include "limper/potential.hpp"

namespace limper {

/// Closed interval [alpha, beta] of spectrum.
struct Band {
  double alpha = 0.0;
  double beta = 0.0;

  double width() const { return beta - alpha; }
  bool contains(double e) const { return alpha <= e && e <= beta; }
  bool operator==(const Band&) const = default;
};

/// Sorted, disjoint bands.  `unresolved` counts bands known to exist (from
/// band labels) that were narrower than the search resolution.
struct BandList {
  std::vector<Band> bands;
  std::int64_t unresolved = 0;
  std::int64_t evaluations = 0;
  bool budget_exhausted = false;

  std::size_t size() const { return bands.size(); }
  bool empty() const { return bands.empty(); }
};

inline constexpr std::int64_t kDefaultEigenCap = 4096;

/// All p bands from the periodic and antiperiodic Jacobi eigenproblems,
/// touching bands kept separate.  Throws PeriodTooLarge above `cap`.
std::vector<Band> raw_bands(const PotentialRecipe& recipe, std::int64_t cap = kDefaultEigenCap);

/// raw_bands with touching bands merged.
BandList band_edges_exact(const PotentialRecipe& recipe, std::int64_t cap = kDefaultEigenCap);

struct LocalBandOptions {
  double resolution_floor = 1e-12;
  std::int64_t max_evaluations = 200000;
  int initial_cells = 64;
  /// Stop after this many bands (0: no limit); the list then covers only a
  /// left part of the window.
  std::int64_t max_bands = 0;
};

/// Spectrum inside [lo, hi], found from band labels with bisection of each
/// edge.  Works for any period.
BandList local_bands(const PotentialRecipe& recipe, double lo, double hi,
                     const LocalBandOptions& options = {});

bool in_spectrum(double energy, const PotentialRecipe& recipe);

/// Distance to the nearest spectral point within `search_radius`, +inf if
/// there is none.  Edges are located by label bisection, so arbitrarily
/// thin bands are seen.
double dist_to_spectrum(double energy, const PotentialRecipe& recipe, double search_radius);

/// Bottom of the spectrum.
double spectrum_infimum(const PotentialRecipe& recipe);

double spectrum_measure(const BandList& bands);

/// Integrated density of states.  Throws PeriodTooLarge above the eigen cap.
double ids(double energy, const PotentialRecipe& recipe);

/// L(E) = integral of log|t - E| dN(t), integrated band by band in the
/// quasimomentum variable.
double thouless_lyapunov(double energy, const PotentialRecipe& recipe);

/// Dirichlet eigenvalues of the size x size restriction to sites 0..size-1.
std::vector<double> truncated_eigenvalues(const PotentialRecipe& recipe, std::int64_t size);

}  // namespace limper
