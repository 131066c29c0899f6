#include "limper/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "limper/errors.hpp"

namespace limper {

namespace {

template <class Element>
Element make_step(double energy, double v);

template <>
ScaledMatrix2 make_step<ScaledMatrix2>(double energy, double v) {
  return step_matrix(energy, v);
}

template <>
LiftedMatrix make_step<LiftedMatrix>(double energy, double v) {
  return LiftedMatrix::step(energy, v);
}

// Products over the overlay tree.  Level t of the recipe at energy E is
// memoized; a block with shift s is the previous level at energy E - s since
// T(E, v + s) = T(E - s, v).
template <class Element>
class StructuredProduct {
 public:
  explicit StructuredProduct(const PotentialRecipe& recipe) : recipe_(recipe) {}

  Element level(std::size_t t, double energy) {
    const auto key = std::make_pair(t, energy);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Element out{};
    if (t == 0) {
      for (const StepRun& run : recipe_.base()) {
        out = power(make_step<Element>(energy, run.value), static_cast<std::uint64_t>(run.length)) *
              out;
      }
    } else {
      const StageOverlay& ov = recipe_.overlays()[t - 1];
      const auto refinement = static_cast<std::uint64_t>(ov.refinement);
      out = power(level(t - 1, energy), refinement * static_cast<std::uint64_t>(ov.copies));
      for (double s : ov.shifts) out = power(level(t - 1, energy - s), refinement) * out;
    }
    memo_.emplace(key, out);
    return out;
  }

  // A_n restricted to level t, 0 <= n < level_period(t).
  Element prefix(std::size_t t, double energy, std::int64_t n) {
    if (n == 0) return Element{};
    Element out{};
    if (t == 0) {
      std::int64_t remaining = n;
      for (const StepRun& run : recipe_.base()) {
        const std::int64_t take = std::min(run.length, remaining);
        out = power(make_step<Element>(energy, run.value), static_cast<std::uint64_t>(take)) * out;
        remaining -= take;
        if (remaining == 0) break;
      }
      return out;
    }
    const StageOverlay& ov = recipe_.overlays()[t - 1];
    const std::int64_t p = recipe_.level_period(t - 1);
    const std::int64_t block_len = p * ov.refinement;
    const std::int64_t full_blocks = n / block_len;
    const std::int64_t rem = n % block_len;
    const std::int64_t plain = std::min(full_blocks, ov.copies);
    out = power(level(t - 1, energy), static_cast<std::uint64_t>(plain * ov.refinement));
    for (std::int64_t i = 0; i < full_blocks - ov.copies; ++i) {
      out = power(level(t - 1, energy - ov.shifts[static_cast<std::size_t>(i)]),
                  static_cast<std::uint64_t>(ov.refinement)) *
            out;
    }
    if (rem > 0) {
      const double e = full_blocks < ov.copies
                           ? energy
                           : energy - ov.shifts[static_cast<std::size_t>(full_blocks - ov.copies)];
      out = prefix(t - 1, e, rem % p) * power(level(t - 1, e), static_cast<std::uint64_t>(rem / p)) *
            out;
    }
    return out;
  }

  Element product(double energy, std::int64_t n) {
    const std::size_t top = recipe_.depth();
    const std::int64_t p = recipe_.period();
    return prefix(top, energy, n % p) * power(level(top, energy), static_cast<std::uint64_t>(n / p));
  }

 private:
  const PotentialRecipe& recipe_;
  std::map<std::pair<std::size_t, double>, Element> memo_;
};

std::int64_t floor_div(std::int64_t n, std::int64_t p) {
  std::int64_t q = n / p;
  if (n % p != 0 && n < 0) --q;
  return q;
}

}  // namespace

ScaledMatrix2 one_step(double energy, double v) { return step_matrix(energy, v); }

ScaledMatrix2 transfer_product(double energy, const PotentialRecipe& recipe, std::int64_t n) {
  return transfer_product(energy, recipe, 0, n);
}

ScaledMatrix2 transfer_product(double energy, const PotentialRecipe& recipe, std::int64_t start,
                               std::int64_t n) {
  if (n < 0) throw InvalidArgument("product length must be nonnegative");
  ScaledMatrix2 out;
  for (std::int64_t i = 0; i < n; ++i) out = step_matrix(energy, recipe(start + i)) * out;
  return out;
}

ScaledMatrix2 monodromy(double energy, const PotentialRecipe& recipe) {
  return StructuredProduct<ScaledMatrix2>(recipe).level(recipe.depth(), energy);
}

ScaledMatrix2 fast_transfer(double energy, const PotentialRecipe& recipe, std::int64_t n) {
  if (n < 0) throw InvalidArgument("product length must be nonnegative");
  return StructuredProduct<ScaledMatrix2>(recipe).product(energy, n);
}

LiftedMatrix lifted_monodromy(double energy, const PotentialRecipe& recipe) {
  return StructuredProduct<LiftedMatrix>(recipe).level(recipe.depth(), energy);
}

LiftedMatrix lifted_transfer(double energy, const PotentialRecipe& recipe, std::int64_t n) {
  if (n < 0) throw InvalidArgument("product length must be nonnegative");
  return StructuredProduct<LiftedMatrix>(recipe).product(energy, n);
}

BandPosition band_position(double energy, const PotentialRecipe& recipe) {
  return band_position(lifted_monodromy(energy, recipe), recipe.period());
}

double Discriminant::value() const {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_abs_trace);
}

Discriminant discriminant(double energy, const PotentialRecipe& recipe) {
  const ScaledMatrix2 m = monodromy(energy, recipe);
  const LogValue tr = m.trace();
  return {tr.sign, tr.log_abs, m.abs_trace()};
}

bool trace_in_spectrum(const Discriminant& d) { return d.abs_trace <= 2.0; }

double lyapunov_from_trace(const Discriminant& d, std::int64_t period) {
  if (trace_in_spectrum(d)) return 0.0;
  const double p = static_cast<double>(period);
  if (d.abs_trace < 1e150) return std::acosh(0.5 * d.abs_trace) / p;
  const double lx = d.log_abs_trace - kLn2;
  return (lx + std::log1p(std::sqrt(-std::expm1(-2.0 * lx)))) / p;
}

double lyapunov_periodic(double energy, const PotentialRecipe& recipe) {
  return lyapunov_from_trace(discriminant(energy, recipe), recipe.period());
}

double finite_lyapunov(double energy, const PotentialRecipe& recipe, std::int64_t n) {
  if (n < 1) throw InvalidArgument("finite_lyapunov needs N >= 1");
  const double l = fast_transfer(energy, recipe, n).log_norm() / static_cast<double>(n);
  return std::max(l, 0.0);
}

std::complex<double> BlochVector::relative(std::int64_t n, std::int64_t ref_cycle) const {
  const std::int64_t q = floor_div(n, period);
  const std::int64_t r = n - q * period;
  const double turns = static_cast<double>(q - ref_cycle);
  return std::polar(1.0, turns * theta) * values[static_cast<std::size_t>(r)];
}

BlochVector bloch_solution(double energy, const PotentialRecipe& recipe) {
  const std::int64_t p = recipe.period();
  if (p > kBlochMaxPeriod) {
    throw PeriodTooLarge("bloch_solution materializes one period; period " + std::to_string(p) +
                         " is above the limit");
  }
  const ScaledMatrix2 m = monodromy(energy, recipe);
  const Discriminant d{m.trace().sign, m.trace().log_abs, m.abs_trace()};
  if (d.abs_trace > 2.0 + 1e-9) {
    throw NotInSpectrum("energy " + std::to_string(energy) + " is outside the spectrum (|tr| = " +
                        std::to_string(d.abs_trace) + ")");
  }
  BlochVector psi;
  psi.energy = energy;
  psi.period = p;
  const double half = std::clamp(0.5 * d.value(), -1.0, 1.0);
  psi.theta = std::acos(half);
  psi.multiplier = std::polar(1.0, psi.theta);

  // Kernel of M - lambda on the normalized entries.
  using C = std::complex<double>;
  const std::int64_t ex = std::clamp<std::int64_t>(-m.exponent(), -2000, 2000);
  const C lam = psi.multiplier * std::ldexp(1.0, static_cast<int>(ex));
  C w0 = m.b(), w1 = lam - m.a();
  const C u0 = lam - m.d(), u1 = m.c();
  if (std::norm(u0) + std::norm(u1) > std::norm(w0) + std::norm(w1)) {
    w0 = u0;
    w1 = u1;
  }
  if (std::norm(w0) + std::norm(w1) < 1e-28) {
    w0 = 1.0;
    w1 = 0.0;
  }

  psi.values.resize(static_cast<std::size_t>(p));
  C prev = w1;
  C cur = w0;
  for (std::int64_t n = 0; n < p; ++n) {
    psi.values[static_cast<std::size_t>(n)] = cur;
    const C next = (energy - recipe(n)) * cur - prev;
    prev = cur;
    cur = next;
  }
  double sum = 0.0;
  for (const C& z : psi.values) sum += std::norm(z);
  const double scale = 1.0 / std::sqrt(sum);
  for (C& z : psi.values) z *= scale;
  psi.before = w1 * scale;
  psi.after = psi.multiplier * psi.values.front();
  return psi;
}

double bloch_residual(const BlochVector& psi, const PotentialRecipe& recipe) {
  double worst = 0.0;
  const std::int64_t p = psi.period;
  for (std::int64_t n = 0; n < p; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const std::complex<double> left = n == 0 ? psi.before : psi.values[i - 1];
    const std::complex<double> right = n == p - 1 ? psi.after : psi.values[i + 1];
    const std::complex<double> r = left + right + (recipe(n) - psi.energy) * psi.values[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace limper
