#pragma once

#include <stdexcept>
#include <string>

namespace polyexp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A point, radius or grid lies outside the domain an operation accepts.
class DomainError : public Error {
public:
  using Error::Error;
};

/// An argument is out of its documented range (orders, cut-offs, empty scans).
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// Unsupported numeric configuration, e.g. an unknown working precision.
class ConfigurationError : public Error {
public:
  using Error::Error;
};

/// Basis construction could not reach the requested orthonormality.
class ConstructionError : public Error {
public:
  ConstructionError(const std::string& what, double defect)
    : Error(what), defect_(defect) {}

  double defect() const noexcept { return defect_; }

private:
  double defect_;
};

/// A relative metric whose reference norm vanishes.
class UndefinedMetricError : public Error {
public:
  using Error::Error;
};

/// A linear solve failed (singular or non-finite system).
class SolverError : public Error {
public:
  using Error::Error;
};

/// Malformed input files. Carries the 1-based line number when known.
class InputError : public Error {
public:
  InputError(const std::string& what, std::size_t line = 0)
    : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace polyexp
