#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>

namespace limper {

inline constexpr double kLn2 = 0.693147180559945309417232121458176568;

/// Signed real number stored as sign and natural log of its magnitude.
/// sign == 0 means the value is exactly zero (log_abs is -inf then).
struct LogValue {
  int sign = 0;
  double log_abs = -std::numeric_limits<double>::infinity();

  static LogValue from(double x);
  /// Converts back to a double; saturates to +-inf / 0 outside range.
  double value() const;
};

LogValue operator*(LogValue a, LogValue b);

/// 2x2 real matrix stored as 2^exponent * entries, with the largest entry
/// magnitude kept inside [1/2, 2].  Renormalization is by powers of two and
/// therefore exact.
class ScaledMatrix2 {
 public:
  /// Identity, exponent 0.
  ScaledMatrix2() = default;
  ScaledMatrix2(double a, double b, double c, double d, std::int64_t exponent = 0);

  static ScaledMatrix2 identity() { return {}; }

  double a() const { return m_[0]; }
  double b() const { return m_[1]; }
  double c() const { return m_[2]; }
  double d() const { return m_[3]; }
  const std::array<double, 4>& entries() const { return m_; }

  std::int64_t exponent() const { return exponent_; }
  /// Natural-log scale: the represented matrix is e^{logscale} * entries.
  double logscale() const { return static_cast<double>(exponent_) * kLn2; }

  /// Determinant of the normalized entries (not of the represented matrix).
  double entries_det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
  /// log det of the represented matrix; ~0 for transfer-matrix products.
  double log_abs_det() const;

  /// Largest singular value of the normalized entries.
  double entries_norm() const;
  /// log of the spectral norm of the represented matrix.
  double log_norm() const { return logscale() + std::log(entries_norm()); }

  LogValue trace() const;
  /// |trace| of the represented matrix; +inf when out of range.
  double abs_trace() const;

  /// Represented entry, possibly overflowing to +-inf.
  double value(int row, int col) const;

  friend ScaledMatrix2 operator*(const ScaledMatrix2& x, const ScaledMatrix2& y);

 private:
  void normalize();

  std::array<double, 4> m_{1.0, 0.0, 0.0, 1.0};
  std::int64_t exponent_ = 0;
};

std::ostream& operator<<(std::ostream& os, const ScaledMatrix2& m);

/// m^n for a matrix of determinant 1 (every transfer-matrix product), from
/// m^n = alpha_n m - alpha_{n-1} I with alpha_n written through the
/// eigenvalues.  Repeated squaring loses accuracy on non-normal matrices.
ScaledMatrix2 power(const ScaledMatrix2& m, std::uint64_t n);

/// Repeated squaring; Element needs operator* and a default-constructed identity.
template <class Element>
Element power(Element base, std::uint64_t n) {
  Element result{};
  while (n > 0) {
    if (n & 1u) result = base * result;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

/// Elementary transfer matrix [[E - v, -1], [1, 0]].
inline ScaledMatrix2 step_matrix(double energy, double v) {
  return ScaledMatrix2(energy - v, -1.0, 1.0, 0.0);
}

}  // namespace limper
