#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "limper/potential.hpp"
#include "limper/rotation.hpp"
#include "limper/scaled_matrix.hpp"

namespace limper {

ScaledMatrix2 one_step(double energy, double v);

/// Literal ordered product T(N-1) ... T(0), one factor per site.  O(N); kept
/// as the reference the structured routines are tested against.
ScaledMatrix2 transfer_product(double energy, const PotentialRecipe& recipe, std::int64_t n);
/// Ordered product over sites start, ..., start + n - 1.
ScaledMatrix2 transfer_product(double energy, const PotentialRecipe& recipe, std::int64_t start,
                               std::int64_t n);

/// Period transfer matrix through the overlay factorization; cost is
/// polynomial in the stack depth and logarithmic in the copy counts.
ScaledMatrix2 monodromy(double energy, const PotentialRecipe& recipe);
/// A_n for arbitrary n >= 0 through the same factorization.
ScaledMatrix2 fast_transfer(double energy, const PotentialRecipe& recipe, std::int64_t n);

LiftedMatrix lifted_monodromy(double energy, const PotentialRecipe& recipe);
LiftedMatrix lifted_transfer(double energy, const PotentialRecipe& recipe, std::int64_t n);
BandPosition band_position(double energy, const PotentialRecipe& recipe);

/// tr A_p(E) in sign / log-magnitude form.
struct Discriminant {
  int sign = 0;
  double log_abs_trace = 0.0;
  /// |trace|, +inf when not representable.
  double abs_trace = 0.0;

  double value() const;
};

Discriminant discriminant(double energy, const PotentialRecipe& recipe);
bool trace_in_spectrum(const Discriminant& d);

/// (1/p) arccosh(|tr|/2) for |tr| > 2, else 0, evaluated without overflow.
double lyapunov_from_trace(const Discriminant& d, std::int64_t period);
double lyapunov_periodic(double energy, const PotentialRecipe& recipe);

/// (1/N) log of the spectral norm of A_N(E).
double finite_lyapunov(double energy, const PotentialRecipe& recipe, std::int64_t n);

/// Bloch solution over one period: values[r] = psi(r) for r in [0, p),
/// psi(n + p) = multiplier * psi(n), and sum_{r<p} |psi(r)|^2 = 1.
struct BlochVector {
  double energy = 0.0;
  double theta = 0.0;
  std::int64_t period = 0;
  std::complex<double> multiplier{1.0, 0.0};
  std::vector<std::complex<double>> values;
  std::complex<double> before;  // psi(-1)
  std::complex<double> after;   // psi(p)

  /// psi(n) divided by multiplier^ref_cycle, where n lies in cycle
  /// floor(n / p).  Comparing neighbours with a common ref_cycle avoids
  /// evaluating large powers of the multiplier.
  std::complex<double> relative(std::int64_t n, std::int64_t ref_cycle) const;
  std::complex<double> operator()(std::int64_t n) const { return relative(n, 0); }
};

/// Largest period for which bloch_solution materializes a full period.
inline constexpr std::int64_t kBlochMaxPeriod = std::int64_t{1} << 24;

/// Throws NotInSpectrum when |tr| > 2 beyond tolerance, PeriodTooLarge above
/// kBlochMaxPeriod.
BlochVector bloch_solution(double energy, const PotentialRecipe& recipe);

/// Max over one period of |(H - E) psi|(n) for n in [0, p).
double bloch_residual(const BlochVector& psi, const PotentialRecipe& recipe);

}  // namespace limper
