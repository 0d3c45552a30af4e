#pragma once

#include <stdexcept>
#include <string>

namespace vex {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

/// A new column is numerically dependent on the current orthonormal basis.
class BreakdownError : public Error {
public:
  using Error::Error;
};

class SingularError : public Error {
public:
  using Error::Error;
};

/// An extrapolation is undefined for the given window (vanishing normalization).
class DegenerateError : public Error {
public:
  using Error::Error;
};

class UnsupportedError : public Error {
public:
  using Error::Error;
};

/// Backtracking exhausted its halving budget without satisfying Armijo.
class LineSearchError : public Error {
public:
  using Error::Error;
};

/// The requested operation needs a Jacobian of a different shape.
class ShapeError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

/// A report, history or config file could not be read or written.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace vex
