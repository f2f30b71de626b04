#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration (CLI exit code 2).
class UsageError : public Error {
  public:
    using Error::Error;
};

/// Inputs outside the asymptotic or numerical regime the methods are valid
/// for: separation violations, eps too large, under-resolved grids
/// (CLI exit code 3).
class RegimeError : public Error {
  public:
    using Error::Error;
};

/// A computation would exceed a configured resource cap (CLI exit code 4).
class ResourceError : public Error {
  public:
    using Error::Error;
};

/// Linear algebra failure that should not occur for admissible inputs.
class SolverError : public Error {
  public:
    using Error::Error;
};

}  // namespace fraclap
