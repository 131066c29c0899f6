#pragma once

#include <stdexcept>
#include <string>

namespace limper {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dense eigensolver route was asked for a period above its cap.
class PeriodTooLarge : public Error {
 public:
  using Error::Error;
};

/// Period arithmetic left the 63-bit range.
class PeriodOverflow : public Error {
 public:
  using Error::Error;
};

/// A spectral construction (Bloch vector, splitting) was requested at an
/// energy of the wrong type.
class NotInSpectrum : public Error {
 public:
  using Error::Error;
};

class EllipticEnergy : public Error {
 public:
  using Error::Error;
};

class NoBandFound : public Error {
 public:
  using Error::Error;
};

class EmptyFamily : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A construction stage could not be certified.
class StageFailure : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace limper
