#include "limper/construct_discontinuity.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "limper/construct_generic.hpp"
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

std::array<double, 2> unit(double x, double y) {
  const double n = std::hypot(x, y);
  return {x / n, y / n};
}

// Eigenvector of the normalized entries for eigenvalue mu.
std::array<double, 2> eigenvector(const ScaledMatrix2& m, double mu) {
  const double x0 = m.b(), y0 = mu - m.a();
  const double x1 = mu - m.d(), y1 = m.c();
  std::array<double, 2> w = std::hypot(x0, y0) >= std::hypot(x1, y1) ? unit(x0, y0) : unit(x1, y1);
  if (w[0] < 0.0 || (w[0] == 0.0 && w[1] < 0.0)) {
    w[0] = -w[0];
    w[1] = -w[1];
  }
  return w;
}

LogValue logvalue(double x, std::int64_t exponent) {
  LogValue v = LogValue::from(x);
  if (v.sign != 0) v.log_abs += static_cast<double>(exponent) * kLn2;
  return v;
}

// |x - y + 1| / max(1, |x|, |y|) for log-form x, y.
double identity_residual(const LogValue& x, const LogValue& y) {
  const double big = std::max(x.log_abs, y.log_abs);
  if (big < 600.0) {
    const double xv = x.value(), yv = y.value();
    return std::fabs(xv - yv + 1.0) / std::max({1.0, std::fabs(xv), std::fabs(yv)});
  }
  // The +1 is far below double resolution here; compare the two large terms.
  const LogValue& hi = x.log_abs >= y.log_abs ? x : y;
  const LogValue& lo = x.log_abs >= y.log_abs ? y : x;
  if (lo.sign == 0) return 1.0;
  const double ratio = std::exp(lo.log_abs - hi.log_abs) * (hi.sign == lo.sign ? 1.0 : -1.0);
  return std::fabs(1.0 - ratio);
}

double overlay_sup_change(const PotentialRecipe& cur, const PotentialRecipe& prev) {
  double sup = 0.0;
  for (std::size_t t = prev.depth(); t < cur.depth(); ++t) {
    for (double s : cur.overlays()[t].shifts) sup = std::max(sup, std::fabs(s));
  }
  return sup;
}

double l0_target(double gamma, std::int64_t k) {
  double sum = 0.0;
  for (std::int64_t s = 1; s <= k; ++s) sum += std::ldexp(1.0, -static_cast<int>(s));
  return (2.0 - sum) * gamma;
}

}  // namespace

HyperbolicSplitting eigen_split(const ScaledMatrix2& m) {
  if (m.abs_trace() <= 2.0) {
    throw EllipticEnergy("eigen_split needs |tr| > 2, got " + std::to_string(m.abs_trace()));
  }
  const double t = m.a() + m.d();
  const std::int64_t e2 = -2 * m.exponent();
  const double det = e2 < -2000 ? 0.0 : std::ldexp(1.0, static_cast<int>(std::min<std::int64_t>(e2, 2000)));
  const double disc = std::sqrt(std::max(0.25 * t * t - det, 0.0));
  const double mu1 = 0.5 * t + std::copysign(disc, t);
  const double mu2 = det / mu1;

  HyperbolicSplitting s;
  s.sign = t > 0.0 ? 1 : -1;
  s.log_rate = std::log(std::fabs(mu1)) + static_cast<double>(m.exponent()) * kLn2;
  s.v = eigenvector(m, mu1);
  s.u = eigenvector(m, mu2);
  s.v_perp = {-s.v[1], s.v[0]};
  const double cross = s.v[0] * s.u[1] - s.v[1] * s.u[0];
  s.a = (s.v_perp[0] * s.u[1] - s.v_perp[1] * s.u[0]) / cross;
  s.b = (s.v[0] * s.v_perp[1] - s.v[1] * s.v_perp[0]) / cross;

  auto apply = [&](const std::array<double, 2>& w) {
    return std::array<double, 2>{m.a() * w[0] + m.b() * w[1], m.c() * w[0] + m.d() * w[1]};
  };
  const auto mv = apply(s.v);
  const auto mu = apply(s.u);
  s.residual_v = std::hypot(mv[0] - mu1 * s.v[0], mv[1] - mu1 * s.v[1]) / std::fabs(mu1);
  s.residual_u = std::hypot(mu[0] - mu2 * s.u[0], mu[1] - mu2 * s.u[1]) / m.entries_norm();
  return s;
}

HyperbolicSplitting eigen_split(double energy, const PotentialRecipe& recipe) {
  return eigen_split(monodromy(energy, recipe));
}

HChoice choose_h(const ScaledMatrix2& plain, const ScaledMatrix2& lowered) {
  HChoice out;
  out.split = eigen_split(plain);
  const HyperbolicSplitting& s = out.split;
  ScaledMatrix2 power_h;
  for (int h = 1; h <= 2; ++h) {
    power_h = lowered * power_h;
    const double x0 = power_h.a() * s.v[0] + power_h.b() * s.v[1];
    const double x1 = power_h.c() * s.v[0] + power_h.d() * s.v[1];
    const double along = s.v[0] * x0 + s.v[1] * x1;
    const double across = s.v_perp[0] * x0 + s.v_perp[1] * x1;
    out.q[static_cast<std::size_t>(h - 1)] = logvalue(along + s.a * across, power_h.exponent());
  }
  out.trace_lowered = lowered.trace();
  out.identity_residual = identity_residual(out.q[1], out.trace_lowered * out.q[0]);
  out.identity_ok = out.identity_residual <= kIdentityTolerance;
  out.h = out.q[1].log_abs > out.q[0].log_abs ? 2 : 1;
  const double best = out.q[static_cast<std::size_t>(out.h - 1)].log_abs;
  if (!(best > std::log(1e-12))) throw StageFailure("both q_1 and q_2 are negligible");
  return out;
}

HChoice choose_h(double energy, const PotentialRecipe& prev, std::int64_t m0, double shift) {
  const auto n = static_cast<std::uint64_t>(m0);
  return choose_h(power(monodromy(energy, prev), n), power(monodromy(energy + shift, prev), n));
}

PotentialRecipe normalize_potential(const PotentialRecipe& v0, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("normalize_potential needs eps > 0");
  return v0.shifted(eps / 5.0 - spectrum_infimum(v0));
}

PotentialRecipe build_lowered(const PotentialRecipe& prev, std::int64_t m0, std::int64_t m, int h, double e0) {
  if (h != 1 && h != 2) throw InvalidArgument("h must be 1 or 2");
  if (m0 < 1 || m < 1) throw InvalidArgument("build_lowered needs m0 >= 1 and m >= 1");
  StageOverlay ov;
  ov.refinement = m0;
  ov.copies = m;
  ov.shifts.assign(static_cast<std::size_t>(h), -2.0 * e0 / 5.0);
  return prev.with_overlay(ov);
}

BottomBracket check_bottom_bracket(const PotentialRecipe& hat, double e0) {
  BottomBracket out;
  out.e_new = spectrum_infimum(hat.without_trailing_repeats());
  out.ok = 0.6 * e0 - 1e-8 <= out.e_new && out.e_new <= 0.8 * e0 + 1e-8;
  return out;
}

double first_band_top(const PotentialRecipe& recipe) {
  const double bottom = spectrum_infimum(recipe);
  auto in_first = [&](double e) {
    const BandPosition pos = band_position(e, recipe);
    return pos.label == 1 && pos.in_spectrum;
  };
  if (!in_first(bottom)) return bottom;
  double lo = bottom;
  double fails = recipe.max_value() + 2.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = lo + 0.5 * (fails - lo);
    if (mid == lo || mid == fails) break;
    if (in_first(mid)) {
      lo = mid;
    } else {
      fails = mid;
    }
  }
  return lo;
}

bool VerificationReportB::ok() const {
  if (!(prefix_ok && change_ok && bracket_ok && step_bracket_ok && bottom_distance_ok && l0_ok && identity_ok)) {
    return false;
  }
  for (const SmallnessMargin& row : smallness) {
    if (!row.pass) return false;
  }
  return true;
}

std::vector<Band> find_spectral_samples(const PotentialRecipe& recipe, double from, double scale,
                                        std::int64_t count, double min_width, std::int64_t budget) {
  const PotentialRecipe spectral = recipe.without_trailing_repeats();
  const double top = spectral.max_value() + 2.0;
  std::vector<Band> out;
  LocalBandOptions opts;
  opts.resolution_floor = min_width;
  opts.max_evaluations = budget;
  opts.initial_cells = 16;
  opts.max_bands = count;
  const double width = scale / 64.0;
  for (int i = 0; i < 200 && static_cast<std::int64_t>(out.size()) < count; ++i) {
    const double x = from + scale * (std::pow(1.25, i) - 1.0);
    if (x > top) break;
    const BandList found = local_bands(spectral, x, x + width, opts);
    for (const Band& b : found.bands) {
      if (b.width() >= min_width && static_cast<std::int64_t>(out.size()) < count) out.push_back(b);
    }
  }
  return out;
}

void check_stage_b(const std::vector<StageRecordB>& history, std::int64_t k, VerificationReportB& report) {
  const StageRecordB& cur = history.at(static_cast<std::size_t>(k));
  const double gamma = history.front().gamma;
  report.l0 = lyapunov_periodic(0.0, cur.recipe);
  report.l0_target = l0_target(gamma, k);
  report.l0_ok = report.l0 >= report.l0_target - 1e-6;
  const PotentialRecipe spectral = cur.recipe.without_trailing_repeats();
  report.e_k = spectrum_infimum(spectral);
  const double e0 = history.front().e_k;
  report.bracket_lo = std::pow(0.6, static_cast<double>(k)) * e0;
  report.bracket_hi = std::pow(0.8, static_cast<double>(k)) * e0;
  report.bracket_ok = report.bracket_lo - 1e-8 <= report.e_k && report.e_k <= report.bracket_hi + 1e-8;
  if (k == 0) return;

  const StageRecordB& prev = history.at(static_cast<std::size_t>(k - 1));
  const double ep = prev.e_k;
  report.step_bracket_ok = 0.6 * ep - 1e-8 <= report.e_k && report.e_k <= 0.8 * ep + 1e-8;

  report.sup_change = overlay_sup_change(cur.recipe, prev.recipe);
  report.sup_change_bound = 2.0 * ep / 5.0;
  report.change_ok = report.sup_change <= report.sup_change_bound;

  std::mt19937_64 rng(0x5eed0000ULL + static_cast<std::uint64_t>(k));
  std::uniform_int_distribution<std::int64_t> pick(0, prev.period);
  std::vector<std::int64_t> sites{0, prev.period - 1, prev.period};
  for (int i = 0; i < 1000; ++i) sites.push_back(pick(rng));
  report.prefix_ok = true;
  for (std::int64_t n : sites) {
    if (cur.recipe(n) != prev.recipe(n)) report.prefix_ok = false;
  }

  const PotentialRecipe prev_spectral = prev.recipe.without_trailing_repeats();
  const double alpha = spectrum_infimum(prev_spectral);
  const double beta = first_band_top(prev_spectral);
  report.trial_energy = alpha + 0.5 * std::min(beta - alpha, ep / 10.0);
  report.bottom_distance = dist_to_spectrum(report.trial_energy - 2.0 * ep / 5.0, spectral, ep);
  report.bottom_distance_ok = report.bottom_distance <= ep / 10.0;

  const Discriminant d = discriminant(0.0, cur.recipe);
  report.l0_trace_bound = (d.log_abs_trace - kLn2) / static_cast<double>(cur.recipe.period());
  const double hat_period = static_cast<double>(cur.m + cur.h) * static_cast<double>(cur.m0) *
                            static_cast<double>(prev.period);
  report.l0_asymptotic =
      (static_cast<double>(cur.m) * cur.choice.split.log_rate +
       cur.choice.q[static_cast<std::size_t>(std::max(cur.h, 1) - 1)].log_abs) /
      hat_period;
  report.identity_ok = cur.choice.identity_ok;
}

std::vector<VerificationReportB> verify_L0_growth(const std::vector<StageRecordB>& history) {
  std::vector<VerificationReportB> out;
  for (std::size_t k = 0; k < history.size(); ++k) {
    VerificationReportB r;
    check_stage_b(history, static_cast<std::int64_t>(k), r);
    out.push_back(r);
  }
  return out;
}

std::vector<SmallnessMargin> verify_smallness_on_spectra_b(const std::vector<StageRecordB>& history,
                                                           std::int64_t k, std::int64_t samples_per_band,
                                                           int threads) {
  std::vector<SmallnessMargin> rows;
  const StageRecordB& cur = history.at(static_cast<std::size_t>(k));
  const SamplingPolicy policy = policy_for(samples_per_band, threads);
  for (std::int64_t l = 1; l <= k; ++l) {
    rows.push_back(certify_smallness(cur.recipe, history[static_cast<std::size_t>(l)].spectral_samples, true, l,
                                     k, policy));
  }
  return rows;
}

bool DiscontinuityReport::ok() const {
  for (const SmallnessMargin& r : rows) {
    if (!r.pass) return false;
  }
  return l0_ok && telescoped_ok && monotone_below_zero;
}

DiscontinuityReport discontinuity_report(const std::vector<StageRecordB>& history, double offset,
                                         const ConstructionConfig& config, std::int64_t sweep_points) {
  DiscontinuityReport rep;
  const auto K = static_cast<std::int64_t>(history.size()) - 1;
  const StageRecordB& cur = history.back();
  const int threads = resolve_threads(static_cast<int>(config.threads));
  const SamplingPolicy policy = policy_for(config.samples_per_band, threads);
  rep.gamma = history.front().gamma;
  rep.e0 = history.front().e_k;
  rep.l0 = lyapunov_periodic(0.0, cur.recipe);
  rep.l0_target = l0_target(rep.gamma, K);
  rep.l0_ok = rep.l0 >= rep.l0_target - 1e-6;

  rep.bottom_min = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 1; k <= K; ++k) {
    const std::vector<Band>& samples = history[static_cast<std::size_t>(k)].spectral_samples;
    rep.rows.push_back(certify_smallness(cur.recipe, samples, true, k, K, policy));
    const std::vector<double> energies = sample_energies(samples, static_cast<int>(config.samples_per_band), true);
    std::vector<double> values(energies.size());
    parallel_for(energies.size(), threads, [&](std::size_t i) { values[i] = period_growth(energies[i], cur.recipe); });
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
      lowest = std::min(lowest, values[i]);
      if (k == K && values[i] < rep.bottom_min) {
        rep.bottom_min = values[i];
        rep.bottom_energy = energies[i];
      }
    }
    rep.row_minima.push_back(lowest);
  }

  rep.telescoped = 0.0;
  for (std::size_t k = 1; k < history.size(); ++k) {
    rep.telescoped += overlay_sup_change(history[k].recipe, history[k - 1].recipe);
  }
  rep.telescoped_bound = 2.0 * rep.e0;
  rep.telescoped_ok = rep.telescoped <= rep.telescoped_bound + 1e-9;
  rep.offset = offset;
  rep.distance_to_original = rep.telescoped;

  const double lo = -rep.e0 / 4.0;
  const double hi = 2.0 * rep.e0;
  const auto n = static_cast<std::size_t>(std::max<std::int64_t>(sweep_points, 2));
  rep.sweep.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const double e = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    const Discriminant d = discriminant(e, cur.recipe);
    rep.sweep[i] = {e, lyapunov_from_trace(d, cur.recipe.period()), trace_in_spectrum(d)};
  });
  rep.monotone_below_zero = true;
  for (std::size_t i = 1; i < n && rep.sweep[i].energy < 0.0; ++i) {
    if (rep.sweep[i].lyapunov > rep.sweep[i - 1].lyapunov + 1e-12) rep.monotone_below_zero = false;
  }
  return rep;
}

ConstructionResultB run_construction_b(const PotentialRecipe& v0, const ConstructionConfig& config,
                                       std::vector<StageRecordB> history) {
  ConstructionResultB result;
  const int threads = resolve_threads(static_cast<int>(config.threads));
  const SamplingPolicy policy = policy_for(config.samples_per_band, threads);
  const double offset = spectrum_infimum(v0) - config.eps / 5.0;

  if (history.empty()) {
    StageRecordB s0;
    s0.k = 0;
    s0.recipe = normalize_potential(v0, config.eps);
    s0.period = s0.recipe.period();
    s0.e_k = spectrum_infimum(s0.recipe);
    s0.gamma = 0.5 * lyapunov_periodic(0.0, s0.recipe);
    if (!(s0.e_k > 0.0) || !(s0.gamma > 0.0)) {
      result.failure = "stage 0: normalized potential does not have its spectrum above 0";
      return result;
    }
    s0.spectral_samples = find_spectral_samples(s0.recipe, s0.e_k, s0.e_k / 8.0, config.spectral_samples,
                                                config.resolution_floor, config.search_budget);
    history.push_back(s0);
    check_stage_b(history, 0, history.back().report);
  }

  for (auto k = static_cast<std::int64_t>(history.size()); k <= config.stages; ++k) {
    const StageRecordB& prev = history.back();
    StageRecordB rec;
    rec.k = k;
    rec.gamma = prev.gamma;
    try {
      const double ep = prev.e_k;
      rec.delta = ep / 5.0;
      rec.m0 = choose_m0(rec.delta);
      if (config.mode == Mode::Capped) rec.m0 = std::min(rec.m0, config.m0_cap);
      rec.choice = choose_h(0.0, prev.recipe, rec.m0, 2.0 * ep / 5.0);
      rec.h = rec.choice.h;
      if (!rec.choice.identity_ok) {
        result.failure = "stage " + std::to_string(k) + ": Cayley-Hamilton self-check failed (residual " +
                         std::to_string(rec.choice.identity_residual) + ")";
        result.failed_stage = rec;
        result.stages = history;
        return result;
      }

      PotentialRecipe hat;
      double e_new = 0.0;
      bool passed = false;
      for (std::int64_t m = 1; m <= config.m_cap; m *= 2) {
        hat = build_lowered(prev.recipe, rec.m0, m, rec.h, ep);
        const BottomBracket bracket = check_bottom_bracket(hat, ep);
        const double l0 = lyapunov_periodic(0.0, hat);
        const double target = l0_target(rec.gamma, k);
        bool rows_ok = true;
        std::ostringstream line;
        line << "m=" << m << " E_new=" << bracket.e_new << (bracket.ok ? " bracket ok" : " bracket FAIL")
             << " L(0)=" << l0 << " target=" << target;
        for (std::int64_t l = 1; l < k; ++l) {
          const SmallnessMargin row =
              certify_smallness(hat, history[static_cast<std::size_t>(l)].spectral_samples, true, l, k, policy);
          line << " l=" << l << " sup=" << row.sup << " target=" << row.target;
          rows_ok = rows_ok && row.pass;
        }
        rec.report.transcript.push_back(line.str());
        rec.m = m;
        e_new = bracket.e_new;
        if (bracket.ok && l0 >= target - 1e-6 && rows_ok) {
          passed = true;
          break;
        }
        if (m > config.m_cap / 2) break;
      }
      if (!passed && config.mode == Mode::Strict) {
        result.failure = "stage " + std::to_string(k) + ": no m up to m_cap passes bracket, L(0) and smallness";
        result.failed_stage = rec;
        result.stages = history;
        return result;
      }

      rec.spectral_samples = find_spectral_samples(hat, e_new, e_new / 8.0, config.spectral_samples,
                                                   config.resolution_floor, config.search_budget);
      if (rec.spectral_samples.empty()) {
        result.failure = "stage " + std::to_string(k) + ": no resolvable band found above the spectral bottom";
        result.failed_stage = rec;
        result.stages = history;
        return result;
      }
      rec.growth = min_growth_length(hat, smallness_target(k, k), rec.spectral_samples, policy);
      rec.multiplier = (rec.growth.length + hat.period() - 1) / hat.period();
      rec.recipe = rec.multiplier > 1 ? hat.with_overlay({1, rec.multiplier, {}}) : hat;
      rec.period = rec.recipe.period();
      rec.e_k = e_new;
      history.push_back(rec);
      StageRecordB& stored = history.back();
      check_stage_b(history, k, stored.report);
      stored.report.smallness = verify_smallness_on_spectra_b(history, k, config.samples_per_band, threads);
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
  result.report = discontinuity_report(history, offset, config);
  result.completed = true;
  return result;
}

}  // namespace limper
