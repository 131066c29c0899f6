#include "limper/rotation.hpp"

#include <cmath>
#include <numbers>

namespace limper {

namespace {

constexpr double kPi = std::numbers::pi;

LiftAngle normalized(std::int64_t turns, double angle) {
  while (angle >= kPi) {
    angle -= kPi;
    ++turns;
  }
  while (angle < 0.0) {
    angle += kPi;
    --turns;
  }
  return {turns, angle};
}

}  // namespace

LiftedMatrix LiftedMatrix::step(double energy, double v) {
  return LiftedMatrix(step_matrix(energy, v), {0, std::atan2(1.0, energy - v)});
}

double LiftedMatrix::sweep(double phi) const {
  if (phi == 0.0) return 0.0;
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const ScaledMatrix2& m = matrix_;
  const double x0 = m.a(), x1 = m.c();
  const double y0 = m.a() * c + m.b() * s;
  const double y1 = m.c() * c + m.d() * s;
  // det(M e1, M u_phi) = det(M) sin(phi); det of the represented matrix is 1,
  // so on the normalized entries it is 2^{-2 exponent}.
  const std::int64_t e2 = -2 * m.exponent();
  const double cross = e2 < -2000 ? 0.0 : std::ldexp(s, static_cast<int>(e2));
  return std::atan2(cross, x0 * y0 + x1 * y1);
}

LiftAngle LiftedMatrix::apply(double phi) const {
  return normalized(lift_.turns, lift_.angle + sweep(phi));
}

LiftedMatrix operator*(const LiftedMatrix& x, const LiftedMatrix& y) {
  const LiftAngle inner = y.lift_;
  const LiftAngle outer = x.apply(inner.angle);
  return LiftedMatrix(x.matrix_ * y.matrix_, {inner.turns + outer.turns, outer.angle});
}

BandPosition band_position(const LiftedMatrix& monodromy, std::int64_t period) {
  const ScaledMatrix2& m = monodromy.matrix();
  BandPosition pos;
  pos.in_spectrum = m.abs_trace() <= 2.0;
  if (!pos.in_spectrum) {
    // Fixed direction of the projective action: the lifted displacement there
    // is an exact multiple of pi.
    const double t = m.a() + m.d();
    const std::int64_t e2 = -2 * m.exponent();
    const double det = e2 < -2000 ? 0.0 : std::ldexp(1.0, static_cast<int>(e2));
    const double disc = std::sqrt(std::fmax(0.25 * t * t - det, 0.0));
    const double mu = 0.5 * t + std::copysign(disc, t);
    double wx = m.b(), wy = mu - m.a();
    const double ux = mu - m.d(), uy = m.c();
    if (std::hypot(ux, uy) > std::hypot(wx, wy)) {
      wx = ux;
      wy = uy;
    }
    double phi = std::atan2(wy, wx);
    if (phi < 0.0) phi += kPi;
    if (phi >= kPi) phi -= kPi;
    const LiftAngle f = monodromy.apply(phi);
    const double shift = static_cast<double>(f.turns) + (f.angle - phi) / kPi;
    pos.label = period - std::llround(shift);
    return pos;
  }
  // Elliptic: F(phi) - phi stays inside one open interval (n pi, (n+1) pi).
  const LiftAngle f0 = monodromy.at_zero();
  const LiftAngle f1 = monodromy.apply(0.5 * kPi);
  std::int64_t n0 = f0.turns;
  const double frac0 = f0.angle;
  std::int64_t n1 = f1.turns;
  double frac1 = f1.angle - 0.5 * kPi;
  if (frac1 < 0.0) {
    frac1 += kPi;
    --n1;
  }
  const double margin0 = std::fmin(frac0, kPi - frac0);
  const double margin1 = std::fmin(frac1, kPi - frac1);
  pos.label = period - (margin0 >= margin1 ? n0 : n1);
  return pos;
}

}  // namespace limper
