#include "limper/scaled_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace limper {

LogValue LogValue::from(double x) {
  if (x == 0.0) return {};
  return {x > 0 ? 1 : -1, std::log(std::fabs(x))};
}

double LogValue::value() const {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_abs);
}

LogValue operator*(LogValue a, LogValue b) {
  if (a.sign == 0 || b.sign == 0) return {};
  return {a.sign * b.sign, a.log_abs + b.log_abs};
}

ScaledMatrix2::ScaledMatrix2(double a, double b, double c, double d, std::int64_t exponent)
    : m_{a, b, c, d}, exponent_(exponent) {
  normalize();
}

void ScaledMatrix2::normalize() {
  const double mx = std::max({std::fabs(m_[0]), std::fabs(m_[1]), std::fabs(m_[2]), std::fabs(m_[3])});
  if (mx == 0.0 || (mx >= 0.5 && mx <= 2.0)) return;
  int e = 0;
  std::frexp(mx, &e);  // mx = f * 2^e, f in [1/2, 1)
  for (double& x : m_) x = std::ldexp(x, -e);
  exponent_ += e;
}

double ScaledMatrix2::log_abs_det() const {
  const double det = entries_det();
  return std::log(std::fabs(det)) + 2.0 * logscale();
}

double ScaledMatrix2::entries_norm() const {
  const double p = std::hypot(m_[0] + m_[3], m_[1] - m_[2]);
  const double q = std::hypot(m_[0] - m_[3], m_[1] + m_[2]);
  return 0.5 * (p + q);
}

LogValue ScaledMatrix2::trace() const {
  LogValue t = LogValue::from(m_[0] + m_[3]);
  if (t.sign != 0) t.log_abs += logscale();
  return t;
}

double ScaledMatrix2::abs_trace() const {
  const double t = std::fabs(m_[0] + m_[3]);
  if (exponent_ > 4096) return t == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  if (exponent_ < -4096) return 0.0;
  return std::ldexp(t, static_cast<int>(exponent_));
}

double ScaledMatrix2::value(int row, int col) const {
  const double x = m_[2 * row + col];
  if (exponent_ > 4096) return x == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), x);
  if (exponent_ < -4096) return 0.0;
  return std::ldexp(x, static_cast<int>(exponent_));
}

ScaledMatrix2 operator*(const ScaledMatrix2& x, const ScaledMatrix2& y) {
  const auto& p = x.m_;
  const auto& q = y.m_;
  return ScaledMatrix2(p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3],
                       p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3],
                       x.exponent_ + y.exponent_);
}

namespace {

// alpha_k = U_{k-1}(tau / 2) as a signed logarithm.
struct ChebyshevCoefficients {
  // log |tau| and sign of the trace of the represented matrix.
  double log_tau = 0.0;
  int tau_sign = 0;
  // Hyperbolic: log |lambda| with lambda the larger eigenvalue.
  bool hyperbolic = false;
  double log_lambda = 0.0;
  // Elliptic: phi in [0, pi / 2] with tau = 2 cos(phi) for tau >= 0 and
  // tau = -2 cos(phi) for tau < 0.
  double phi = 0.0;

  LogValue alpha(std::uint64_t k) const {
    if (k == 0) return {};
    const double kd = static_cast<double>(k);
    // tau < 0 turns alpha_k into (-1)^{k-1} alpha_k(|tau|).
    const int parity = (tau_sign < 0 && (k - 1) % 2 == 1) ? -1 : 1;
    if (hyperbolic) {
      // alpha_k = lambda^{k-1} (1 - r^k) / (1 - r), r = lambda^{-2}.
      const double ratio = log_lambda > 0.0 ? std::expm1(-2.0 * kd * log_lambda) / std::expm1(-2.0 * log_lambda) : kd;
      return {parity, (kd - 1.0) * log_lambda + std::log(ratio)};
    }
    if (phi == 0.0) return {parity, std::log(kd)};
    return LogValue::from(parity * std::sin(kd * phi) / std::sin(phi));
  }
};

ChebyshevCoefficients coefficients(const ScaledMatrix2& m) {
  ChebyshevCoefficients c;
  const double t = m.a() + m.d();
  if (t == 0.0) {
    c.phi = 0.5 * std::numbers::pi;
    c.tau_sign = 1;
    return c;
  }
  c.tau_sign = t > 0.0 ? 1 : -1;
  c.log_tau = std::log(std::fabs(t)) + m.logscale();
  if (c.log_tau > 300.0) {
    c.hyperbolic = true;
    c.log_lambda = c.log_tau;
    return c;
  }
  const double tau = std::fabs(std::ldexp(t, static_cast<int>(std::max<std::int64_t>(m.exponent(), -2000))));
  if (tau > 2.0) {
    c.hyperbolic = true;
    const double x = 0.5 * tau - 1.0;
    c.log_lambda = std::log1p(x + std::sqrt(x * (x + 2.0)));
  } else {
    c.phi = 2.0 * std::asin(std::sqrt(std::max(0.0, 0.5 - 0.25 * tau)));
  }
  return c;
}

}  // namespace

ScaledMatrix2 power(const ScaledMatrix2& m, std::uint64_t n) {
  if (n == 0) return {};
  if (n == 1) return m;
  const ChebyshevCoefficients c = coefficients(m);
  const LogValue an = c.alpha(n);
  const LogValue prev = c.alpha(n - 1);
  // Result = 2^{shift + exponent} * (s_n N - s_prev I), N the normalized entries.
  const double anchor = an.sign != 0 ? an.log_abs : prev.log_abs;
  const auto shift = static_cast<std::int64_t>(std::floor(anchor / std::numbers::ln2));
  const double sn = an.sign == 0 ? 0.0 : an.sign * std::exp(an.log_abs - static_cast<double>(shift) * std::numbers::ln2);
  const double prev_log = prev.log_abs - static_cast<double>(shift + m.exponent()) * std::numbers::ln2;
  const double sp = prev.sign == 0 || prev_log < -1000.0 ? 0.0 : prev.sign * std::exp(prev_log);
  return ScaledMatrix2(sn * m.a() - sp, sn * m.b(), sn * m.c(), sn * m.d() - sp, shift + m.exponent());
}

std::ostream& operator<<(std::ostream& os, const ScaledMatrix2& m) {
  return os << "2^" << m.exponent() << " * [[" << m.a() << ", " << m.b() << "], [" << m.c() << ", "
            << m.d() << "]]";
}

}  // namespace limper
