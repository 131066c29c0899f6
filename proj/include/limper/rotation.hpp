#pragma once

#include <cstdint>

#include "limper/scaled_matrix.hpp"

namespace limper {

/// Real number turns*pi + angle with angle in [0, pi).
struct LiftAngle {
  std::int64_t turns = 0;
  double angle = 0.0;
};

/// A transfer matrix together with a lift of its projective action to the
/// real line, i.e. an element of the universal cover of SL(2,R).  The lift F
/// is pinned by its value at direction 0 and satisfies F(phi + pi) = F(phi) + pi.
///
/// Composing lifts along a product of one-step matrices counts how often the
/// solution direction winds, which gives exact Sturm-type band counts for
/// periods far beyond any eigensolver.
class LiftedMatrix {
 public:
  LiftedMatrix() = default;

  /// One-step matrix [[E - v, -1], [1, 0]] with the lift that is continuous
  /// in E and sends direction 0 into (0, pi).
  static LiftedMatrix step(double energy, double v);

  const ScaledMatrix2& matrix() const { return matrix_; }
  LiftAngle at_zero() const { return lift_; }

  /// F(phi) for phi in [0, pi).
  LiftAngle apply(double phi) const;

  friend LiftedMatrix operator*(const LiftedMatrix& x, const LiftedMatrix& y);

 private:
  LiftedMatrix(const ScaledMatrix2& m, LiftAngle lift) : matrix_(m), lift_(lift) {}

  /// Counterclockwise projective angle in [0, pi] from M e1 to M u_phi.
  double sweep(double phi) const;

  ScaledMatrix2 matrix_{};
  LiftAngle lift_{};
};

/// Where an energy sits relative to the bands of a periodic operator.
/// label counts the bands whose left edge is <= E: inside band j it is j,
/// in the gap above band j it is also j.
struct BandPosition {
  bool in_spectrum = false;
  std::int64_t label = 0;
};

/// Reads the band position off a lifted monodromy over `period` sites.
BandPosition band_position(const LiftedMatrix& monodromy, std::int64_t period);

}  // namespace limper
