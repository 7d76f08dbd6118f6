#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sarhcox {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

class IndexError : public Error {
public:
  using Error::Error;
};

/// A lattice site lacks the neighbors an operation needs.
class BoundaryError : public IndexError {
public:
  using IndexError::IndexError;
};

/// Sampling or quadrature grid too coarse for the requested quantity.
class ResolutionError : public Error {
public:
  using Error::Error;
};

/// A spectral density (or its denominator) vanished or went non-positive.
class SingularityError : public Error {
public:
  SingularityError(const std::string& what, double w1, double w2)
      : Error(what + " at omega=(" + std::to_string(w1) + "," + std::to_string(w2) + ")"),
        omega1(w1), omega2(w2) {}
  explicit SingularityError(const std::string& what) : Error(what) {}

  double omega1 = 0.0;
  double omega2 = 0.0;
};

/// Autoregression violates the stationarity requirement for one mode.
class StationarityError : public Error {
public:
  StationarityError(const std::string& what, int mode_index)
      : Error(what + " (mode " + std::to_string(mode_index) + ")"), mode(mode_index) {}

  int mode = 0;
};

class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// An exponent exceeded the saturation guard.
class OverflowError : public Error {
public:
  OverflowError(const std::string& what, double max_exp)
      : Error(what + " (max exponent " + std::to_string(max_exp) + ")"), max_exponent(max_exp) {}

  double max_exponent = 0.0;
};

class AmbiguityError : public Error {
public:
  using Error::Error;
};

class RankError : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  using Error::Error;
};

/// Wraps an error raised inside a named pipeline stage.
class StageError : public Error {
public:
  StageError(std::string stage_name, const std::string& what)
      : Error("[" + stage_name + "] " + what), stage(std::move(stage_name)) {}

  std::string stage;
};

}  // namespace sarhcox
