#include "limper/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "limper/errors.hpp"
#include "limper/parallel.hpp"
#include "limper/transfer.hpp"

namespace limper {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

class Collector {
 public:
  explicit Collector(std::vector<PropertyCheck>& out) : out_(out) {}

  void add(std::int64_t stage, std::string property, bool pass, std::string detail) {
    out_.push_back({stage, std::move(property), pass, std::move(detail)});
  }

  void margin(std::int64_t stage, const SmallnessMargin& row) {
    add(stage, "(iii) smallness l=" + std::to_string(row.l), row.pass,
        "sup " + fmt(row.sup) + " target " + fmt(row.target) + " margin " + fmt(row.margin()) + " over " +
            std::to_string(row.samples) + " energies");
  }

 private:
  std::vector<PropertyCheck>& out_;
};

// Centers of recorded intervals must lie in the spectrum of the stage.
std::int64_t membership_failures(const std::vector<double>& centers, const PotentialRecipe& recipe, int threads) {
  const PotentialRecipe spectral = recipe.without_trailing_repeats();
  std::vector<char> bad(centers.size(), 0);
  parallel_for(centers.size(), threads, [&](std::size_t i) { bad[i] = in_spectrum(centers[i], spectral) ? 0 : 1; });
  return std::count(bad.begin(), bad.end(), 1);
}

void verify_a(const StageFile& f, int threads, Collector& c) {
  const std::vector<StageRecordA>& h = f.history_a;
  SamplingPolicy policy;
  policy.nodes_per_band = static_cast<int>(f.config.samples_per_band);
  policy.max_nodes_per_band = 32 * policy.nodes_per_band;
  policy.threads = threads;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const StageRecordA& s = h[k];
    const auto ks = static_cast<std::int64_t>(k);
    c.add(ks, "period", s.period == s.recipe.period(),
          "recorded " + std::to_string(s.period) + " recipe " + std::to_string(s.recipe.period()));
    std::vector<double> centers;
    for (const OpenInterval& i : s.sigma.intervals) centers.push_back(i.center());
    const std::int64_t missing = membership_failures(centers, s.recipe, threads);
    c.add(ks, "sigma inside spectrum", missing == 0,
          std::to_string(missing) + " of " + std::to_string(centers.size()) + " interval centers outside");
    const double eps = std::ldexp(1.0, -static_cast<int>(k));
    c.add(ks, "(iv) density", is_eps_dense(s.sigma, eps), "eps " + fmt(eps));
    if (k == 0) {
      const PotentialRecipe base = step_potential(f.config.L);
      c.add(ks, "(ii) step potential", s.recipe.base() == base.base() && s.recipe.period() % base.period() == 0,
            "L " + std::to_string(f.config.L));
      const BandList bands = band_edges_exact(base);
      const SmallnessMargin row = certify_smallness(s.recipe, bands.bands, true, 0, 0, policy);
      c.add(ks, "growth at p_0", row.pass,
            "sup " + fmt(row.sup) + " target " + fmt(row.target) + " margin " + fmt(row.margin()));
      continue;
    }
    VerificationReportA r;
    check_structure(h, ks, f.config.seed, r);
    c.add(ks, "(i) sup change", r.property_i, "change " + fmt(r.sup_change) + " bound " + fmt(r.sup_change_bound));
    c.add(ks, "(ii) prefix agreement", r.property_ii, std::to_string(r.prefix_checks) + " sites compared");
    const NestingReport nest = check_nesting(s.sigma, h[k - 1].sigma);
    c.add(ks, "(v) nesting", nest.ok(),
          std::to_string(nest.orphan_parents.size()) + " orphan parents, " +
              std::to_string(nest.misplaced_children.size()) + " misplaced children");
    for (const SmallnessMargin& row : verify_property_iii(h, ks, f.config.samples_per_band, threads)) {
      c.margin(ks, row);
    }
  }
}

void verify_b(const StageFile& f, int threads, Collector& c) {
  const std::vector<StageRecordB>& h = f.history_b;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const StageRecordB& s = h[k];
    const auto ks = static_cast<std::int64_t>(k);
    c.add(ks, "period", s.period == s.recipe.period(),
          "recorded " + std::to_string(s.period) + " recipe " + std::to_string(s.recipe.period()));
    VerificationReportB r;
    try {
      check_stage_b(h, ks, r);
    } catch (const Error& e) {
      c.add(ks, "stage checks", false, e.what());
      continue;
    }
    c.add(ks, "bottom bracket", r.bracket_ok,
          "E_k " + fmt(r.e_k) + " in [" + fmt(r.bracket_lo) + ", " + fmt(r.bracket_hi) + "]");
    c.add(ks, "recorded E_k", r.e_k == s.e_k, "recomputed " + fmt(r.e_k) + " recorded " + fmt(s.e_k));
    c.add(ks, "(iii) L(0) growth", r.l0_ok, "L(0) " + fmt(r.l0) + " target " + fmt(r.l0_target));
    std::vector<double> centers;
    for (const Band& b : s.spectral_samples) centers.push_back(0.5 * (b.alpha + b.beta));
    const std::int64_t missing = membership_failures(centers, s.recipe, threads);
    c.add(ks, "samples inside spectrum", missing == 0 && !centers.empty(),
          std::to_string(missing) + " of " + std::to_string(centers.size()) + " sample centers outside");
    if (k == 0) {
      if (f.original) {
        const PotentialRecipe expect = normalize_potential(*f.original, f.config.eps);
        c.add(ks, "(ii) normalization", expect == s.recipe, "V_0 = original - inf sigma + eps/5");
      }
      continue;
    }
    const StageRecordB& prev = h[k - 1];
    c.add(ks, "(ii) prefix agreement", r.prefix_ok, "1003 sites compared");
    c.add(ks, "(i) sup change", r.change_ok, "change " + fmt(r.sup_change) + " bound " + fmt(r.sup_change_bound));
    c.add(ks, "step bracket", r.step_bracket_ok, "E_k / E_{k-1} = " + fmt(r.e_k / prev.e_k) + " in [0.6, 0.8]");
    c.add(ks, "bottom trial distance", r.bottom_distance_ok,
          "dist " + fmt(r.bottom_distance) + " bound " + fmt(prev.e_k / 10.0));
    try {
      const HChoice choice = choose_h(0.0, prev.recipe, s.m0, 2.0 * prev.e_k / 5.0);
      c.add(ks, "Cayley-Hamilton identity", choice.identity_ok && choice.h == s.h,
            "residual " + fmt(choice.identity_residual) + ", h " + std::to_string(choice.h) + " recorded " +
                std::to_string(s.h));
      PotentialRecipe expect = build_lowered(prev.recipe, s.m0, s.m, s.h, prev.e_k);
      if (s.multiplier > 1) expect = expect.with_overlay({1, s.multiplier, {}});
      c.add(ks, "recipe structure", expect == s.recipe,
            "m0 " + std::to_string(s.m0) + " m " + std::to_string(s.m) + " h " + std::to_string(s.h));
    } catch (const Error& e) {
      c.add(ks, "Cayley-Hamilton identity", false, e.what());
    }
    for (const SmallnessMargin& row : verify_smallness_on_spectra_b(h, ks, f.config.samples_per_band, threads)) {
      c.margin(ks, row);
    }
  }
}

}  // namespace

std::vector<PropertyCheck> verify_stage_file(const LoadedStageFile& loaded, int threads) {
  std::vector<PropertyCheck> out;
  Collector c(out);
  c.add(-1, "digest", loaded.digest_ok(), "stored " + loaded.stored_digest + " computed " + loaded.computed_digest);
  try {
    if (loaded.file.construction == 'A') {
      verify_a(loaded.file, threads, c);
    } else {
      verify_b(loaded.file, threads, c);
    }
  } catch (const Error& e) {
    c.add(-1, "verification aborted", false, e.what());
  }
  return out;
}

bool all_pass(const std::vector<PropertyCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.pass; });
}

}  // namespace limper
