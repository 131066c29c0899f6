#include "limper/construct_generic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "limper/errors.hpp"
#include "limper/parallel.hpp"
#include "limper/transfer.hpp"

namespace limper {

namespace {

SamplingPolicy policy_for(std::int64_t samples_per_band, int threads) {
  SamplingPolicy p;
  p.nodes_per_band = static_cast<int>(samples_per_band);
  p.max_nodes_per_band = std::max(p.nodes_per_band, 32 * p.nodes_per_band);
  p.threads = threads;
  return p;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

PotentialRecipe with_multiplier(const PotentialRecipe& r, std::int64_t multiplier) {
  if (multiplier <= 1) return r;
  return r.with_overlay({1, multiplier, {}});
}

std::int64_t floor_div(std::int64_t n, std::int64_t p) {
  std::int64_t q = n / p;
  if (n % p != 0 && n < 0) --q;
  return q;
}

}  // namespace

bool VerificationReportA::ok() const {
  if (!(property_i && property_ii && density && nesting)) return false;
  for (const SmallnessMargin& row : smallness) {
    if (!row.pass) return false;
  }
  for (const TrialResidual& r : residuals) {
    if (!r.pass) return false;
  }
  for (const WindowSearch& s : searches) {
    if (!s.found) return false;
  }
  return true;
}

PotentialRecipe step_potential(std::int64_t L) {
  if (L < 1) throw InvalidArgument("step potential needs L >= 1");
  return PotentialRecipe({{2.0, L}, {-2.0, L}});
}

StageRecordA initial_stage(std::int64_t L, double mu_target, const ConstructionConfig& config) {
  if (L <= 4) throw InvalidArgument("initial stage needs L > 4");
  const PotentialRecipe base = step_potential(L);
  StageRecordA rec;
  rec.k = 0;
  const BandList bands = band_edges_exact(base);
  for (const Band& b : bands.bands) {
    if (b.width() > config.resolution_floor) rec.sigma.intervals.push_back({b.alpha, b.beta});
  }
  rec.sigma.stage = 0;
  rec.report.density = is_eps_dense(rec.sigma, 1.0);
  if (!rec.report.density) {
    throw StageFailure("band interiors of the L = " + std::to_string(L) +
                       " step potential are not 1-dense; retry with larger L");
  }
  const int threads = resolve_threads(static_cast<int>(config.threads));
  rec.growth = min_growth_length(base, mu_target, bands.bands, policy_for(config.samples_per_band, threads));
  rec.multiplier = ceil_div(rec.growth.length, base.period());
  rec.recipe = with_multiplier(base, rec.multiplier);
  rec.period = rec.recipe.period();
  rec.delta = min_length(rec.sigma);
  return rec;
}

std::int64_t choose_m0(double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("choose_m0 needs delta > 0");
  // Snap quotients within rounding of an integer so that the strict inequality
  // is decided on the intended value (delta = 0.1 gives 1601, not 1600).
  const double raw = 16.0 / (delta * delta);
  const double near = std::round(raw);
  const double q = std::fabs(raw - near) <= 1e-9 * std::max(1.0, near) ? near : std::floor(raw);
  if (q > 4.0e18) throw PeriodOverflow("m0 for delta = " + std::to_string(delta) + " exceeds 63 bits");
  return static_cast<std::int64_t>(q) + 1;
}

PotentialRecipe build_hat_potential(const StageRecordA& prev, std::int64_t m0, std::int64_t m,
                                    std::int64_t k) {
  if (m0 < 1 || m < 1) throw InvalidArgument("build_hat_potential needs m0 >= 1 and m >= 1");
  StageOverlay ov;
  ov.refinement = m0;
  ov.copies = m;
  for (std::int64_t j = -4; j <= 3; ++j) ov.shifts.push_back(block_shift(j, k));
  return prev.recipe.with_overlay(ov);
}

TrialResidual trial_vector_residual(const PotentialRecipe& hat, const PotentialRecipe& prev,
                                    double e_hat, std::int64_t j, std::int64_t k, std::int64_t m,
                                    std::int64_t m0, std::uint64_t seed) {
  const BlochVector psi = bloch_solution(e_hat, prev);
  const std::int64_t p = prev.period();
  const std::int64_t block = m0 * p;
  const std::int64_t start = (m + j + 4) * block;
  const std::int64_t end = start + block;
  const double shift = block_shift(j, k);

  TrialResidual out;
  out.j = j;
  out.energy = e_hat;
  out.bound = 2.0 / std::sqrt(static_cast<double>(m0));

  auto phi = [&](std::int64_t x, std::int64_t ref) -> std::complex<double> {
    if (x < start || x >= end) return 0.0;
    return psi.relative(x, ref);
  };
  auto residual_at = [&](std::int64_t n) {
    const std::int64_t ref = floor_div(n, p);
    return std::abs(phi(n + 1, ref) + phi(n - 1, ref) + (hat(n) - e_hat - shift) * phi(n, ref));
  };

  std::vector<std::int64_t> sites;
  out.exhaustive = block + 2 <= (std::int64_t{1} << 20);
  if (out.exhaustive) {
    for (std::int64_t n = start - 1; n <= end; ++n) sites.push_back(n);
  } else {
    for (std::int64_t n = start - 1; n <= start + p; ++n) sites.push_back(n);
    for (std::int64_t n = end - p - 1; n <= end; ++n) sites.push_back(n);
    std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(j + 4) * 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<std::int64_t> pick(start + p + 1, end - p - 2);
    for (int i = 0; i < 4096; ++i) sites.push_back(pick(rng));
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  }
  double sum = 0.0;
  for (std::int64_t n : sites) {
    const double r = residual_at(n);
    sum += r * r;
    if (r > 1e-9) ++out.nonzero_sites;
  }
  out.sites_checked = static_cast<std::int64_t>(sites.size());

  double norm2 = 0.0;
  if (out.exhaustive) {
    for (std::int64_t n = start; n < end; ++n) norm2 += std::norm(psi.relative(n, floor_div(n, p)));
  } else {
    double period_sum = 0.0;
    for (const auto& z : psi.values) period_sum += std::norm(z);
    norm2 = static_cast<double>(m0) * period_sum;
  }
  out.norm = std::sqrt(norm2);
  out.residual = std::sqrt(sum) / out.norm;
  out.pass = out.residual <= out.bound * (1.0 + 1e-12);
  return out;
}

WindowSearch search_shifted_interval(const PotentialRecipe& hat, const OpenInterval& interval,
                                     std::int64_t j, std::int64_t k, const LocalBandOptions& options) {
  const double s = block_shift(j, k);
  WindowSearch out;
  out.j = j;
  out.window = {interval.lo + s, interval.hi + s};
  const BandList found = local_bands(hat, out.window.lo, out.window.hi, options);
  out.unresolved = found.unresolved;
  out.evaluations = found.evaluations;
  double best = 0.0;
  for (const Band& b : found.bands) {
    const double lo = std::max(b.alpha, out.window.lo);
    const double hi = std::min(b.beta, out.window.hi);
    if (hi - lo > best) {
      best = hi - lo;
      out.band = {lo, hi};
    }
  }
  out.found = best >= options.resolution_floor;
  out.center_distance = dist_to_spectrum(interval.center() + s, hat, out.window.length());
  return out;
}

OpenInterval find_band_in_shifted_interval(const PotentialRecipe& hat, const OpenInterval& interval,
                                           std::int64_t j, std::int64_t k,
                                           const LocalBandOptions& options) {
  const WindowSearch s = search_shifted_interval(hat, interval, j, k, options);
  if (!s.found) {
    std::ostringstream os;
    os << "no band wider than " << options.resolution_floor << " in (" << s.window.lo << ", "
       << s.window.hi << "); " << s.unresolved << " narrower bands detected by label count, "
       << "distance from shifted center to spectrum " << s.center_distance;
    throw NoBandFound(os.str());
  }
  return s.band;
}

std::vector<Band> as_bands(const IntervalFamily& family) {
  std::vector<Band> out;
  out.reserve(family.intervals.size());
  for (const OpenInterval& i : family.intervals) out.push_back({i.lo, i.hi});
  return out;
}

std::int64_t choose_m_for_stage(const std::vector<StageRecordA>& history, std::int64_t m0, std::int64_t k,
                                const ConstructionConfig& config, std::vector<std::string>* transcript) {
  if (history.empty()) throw InvalidArgument("choose_m_for_stage needs a nonempty history");
  if (k <= 1) {
    if (transcript) transcript->push_back("m=1: no earlier spectra to control");
    return 1;
  }
  const int threads = resolve_threads(static_cast<int>(config.threads));
  const SamplingPolicy policy = policy_for(config.samples_per_band, threads);
  for (std::int64_t m = 1; m <= config.m_cap; m *= 2) {
    const PotentialRecipe hat = build_hat_potential(history[static_cast<std::size_t>(k - 1)], m0, m, k);
    bool all = true;
    std::ostringstream line;
    line << "m=" << m;
    for (std::int64_t l = 1; l < k; ++l) {
      const SmallnessMargin row =
          certify_smallness(hat, as_bands(history[static_cast<std::size_t>(l)].sigma), false, l, k, policy);
      line << " l=" << l << " sup=" << row.sup << " target=" << row.target;
      all = all && row.pass;
    }
    if (transcript) transcript->push_back(line.str());
    if (all) return m;
    if (m > config.m_cap / 2) break;
  }
  if (config.mode == Mode::Capped) return config.m_cap;
  throw StageFailure("no m up to m_cap = " + std::to_string(config.m_cap) + " passes the smallness rows");
}

std::vector<SmallnessMargin> verify_property_iii(const std::vector<StageRecordA>& history, std::int64_t k,
                                                 std::int64_t samples_per_band, int threads) {
  std::vector<SmallnessMargin> rows;
  const StageRecordA& cur = history.at(static_cast<std::size_t>(k));
  const SamplingPolicy policy = policy_for(samples_per_band, threads);
  for (std::int64_t l = 1; l <= k; ++l) {
    rows.push_back(certify_smallness(cur.recipe, as_bands(history[static_cast<std::size_t>(l)].sigma), false,
                                     l, k, policy));
  }
  return rows;
}

void check_structure(const std::vector<StageRecordA>& history, std::int64_t k, std::uint64_t seed,
                     VerificationReportA& report) {
  const StageRecordA& cur = history.at(static_cast<std::size_t>(k));
  if (k == 0) {
    report.density = is_eps_dense(cur.sigma, 1.0);
    return;
  }
  const StageRecordA& prev = history.at(static_cast<std::size_t>(k - 1));

  report.sup_change_bound = std::ldexp(1.0, -static_cast<int>(k - 1));
  report.sup_change = 0.0;
  for (std::size_t t = prev.recipe.depth(); t < cur.recipe.depth(); ++t) {
    for (double s : cur.recipe.overlays()[t].shifts) report.sup_change = std::max(report.sup_change, std::fabs(s));
  }
  report.property_i = report.sup_change <= report.sup_change_bound;

  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
  std::uniform_int_distribution<std::int64_t> pick(0, prev.period);
  std::vector<std::int64_t> sites{0, prev.period - 1, prev.period};
  for (int i = 0; i < 1000; ++i) sites.push_back(pick(rng));
  report.prefix_checks = static_cast<std::int64_t>(sites.size());
  report.property_ii = true;
  for (std::int64_t n : sites) {
    if (cur.recipe(n) != prev.recipe(n)) report.property_ii = false;
  }

  report.density = is_eps_dense(cur.sigma, std::ldexp(1.0, -static_cast<int>(k)));
  report.nesting = verify_nesting(cur.sigma, prev.sigma);
}

ConstructionResultA run_construction_a(const ConstructionConfig& config, std::vector<StageRecordA> history) {
  ConstructionResultA result;
  const int threads = resolve_threads(static_cast<int>(config.threads));
  const SamplingPolicy policy = policy_for(config.samples_per_band, threads);
  try {
    if (history.empty()) history.push_back(initial_stage(config.L, smallness_target(0, 0), config));
  } catch (const Error& e) {
    result.failure = std::string("stage 0: ") + e.what();
    return result;
  }

  LocalBandOptions search;
  search.resolution_floor = config.resolution_floor;
  search.max_evaluations = config.search_budget;

  for (auto k = static_cast<std::int64_t>(history.size()); k <= config.stages; ++k) {
    const StageRecordA& prev = history.back();
    StageRecordA rec;
    rec.k = k;
    try {
      IntervalFamily reduced;
      reduced.stage = k - 1;
      const double maxlen = std::ldexp(1.0, -static_cast<int>(k + 1));
      for (const OpenInterval& i : prev.sigma.intervals) reduced.intervals.push_back(pick_subinterval(i, maxlen));
      rec.delta = min_length(reduced);
      rec.m0 = choose_m0(rec.delta);
      if (config.mode == Mode::Capped) rec.m0 = std::min(rec.m0, config.m0_cap);
      std::vector<std::string> transcript;
      rec.m = choose_m_for_stage(history, rec.m0, k, config, &transcript);
      const PotentialRecipe hat = build_hat_potential(prev, rec.m0, rec.m, k);

      const std::size_t n_int = reduced.intervals.size();
      std::vector<WindowSearch> searches(n_int * 8);
      parallel_for(searches.size(), threads, [&](std::size_t idx) {
        const std::int64_t j = static_cast<std::int64_t>(idx % 8) - 4;
        searches[idx] = search_shifted_interval(hat, reduced.intervals[idx / 8], j, k, search);
        searches[idx].interval = static_cast<std::int64_t>(idx / 8);
      });
      rec.report.searches = searches;

      for (std::size_t q = 0; q < n_int; ++q) {
        for (std::int64_t j = -4; j <= 3; ++j) {
          try {
            TrialResidual r = trial_vector_residual(hat, prev.recipe, reduced.intervals[q].center(), j, k,
                                                    rec.m, rec.m0, config.seed);
            r.interval = static_cast<std::int64_t>(q);
            rec.report.residuals.push_back(r);
          } catch (const PeriodTooLarge& e) {
            rec.report.note = std::string("trial residuals skipped: ") + e.what();
            break;
          }
        }
        if (!rec.report.note.empty()) break;
      }

      std::int64_t missing = 0, unresolved = 0;
      for (const WindowSearch& s : searches) {
        if (!s.found) {
          ++missing;
          unresolved += s.unresolved;
        }
      }
      if (missing > 0) {
        rec.recipe = hat;
        rec.period = hat.period();
        std::ostringstream os;
        os << "stage " << k << ": no band wider than " << config.resolution_floor << " in " << missing
           << " of " << searches.size() << " shifted windows (m0 = " << rec.m0 << ", m = " << rec.m
           << ", period " << hat.period() << "); " << unresolved
           << " narrower bands were detected there by band labels";
        result.failure = os.str();
        result.failed_stage = rec;
        result.stages = history;
        return result;
      }

      rec.sigma.stage = k;
      for (const WindowSearch& s : searches) {
        rec.sigma.intervals.push_back(s.band);
        rec.sigma.links.push_back({s.interval, s.j});
      }

      rec.growth = min_growth_length(hat, smallness_target(k, k), as_bands(rec.sigma), policy);
      rec.multiplier = ceil_div(rec.growth.length, hat.period());
      rec.recipe = with_multiplier(hat, rec.multiplier);
      rec.period = rec.recipe.period();
      history.push_back(rec);
      StageRecordA& stored = history.back();
      check_structure(history, k, config.seed, stored.report);
      stored.report.smallness = verify_property_iii(history, k, config.samples_per_band, threads);
      for (const Band& b : as_bands(stored.sigma)) {
        if (!in_spectrum(0.5 * (b.alpha + b.beta), stored.recipe)) ++stored.report.membership_failures;
      }
      const std::vector<double> probe = sample_energies(as_bands(stored.sigma), 3, false);
      for (int i = 0; i <= 3 && stored.period <= (std::int64_t{1} << (60 - i)); ++i) {
        double worst = 0.0;
        for (double e : probe) {
          worst = std::max(worst, finite_lyapunov(e, stored.recipe, stored.period << i));
        }
        stored.report.longer_lengths.push_back(worst);
      }
      if (!stored.report.ok()) {
        result.failure = "stage " + std::to_string(k) + ": certification failed";
        result.failed_stage = stored;
        history.pop_back();
        result.stages = history;
        return result;
      }
    } catch (const Error& e) {
      result.failure = "stage " + std::to_string(k) + ": " + e.what();
      result.failed_stage = rec;
      result.stages = history;
      return result;
    }
  }
  result.stages = history;
  result.completed = true;
  return result;
}

}  // namespace limper
