#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <utility>

namespace pkb {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file (CSV/GMT/labels/model). Message carries location info.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// Structurally valid input that violates a documented precondition.
class InvalidInput : public Error {
  public:
    using Error::Error;
};

/// Iterative solver failed to reach its convergence criterion.
/// Carries the last iterate so callers can inspect or salvage it.
class SolverError : public Error {
  public:
    SolverError(const std::string& what, Eigen::VectorXd last_iterate)
        : Error(what), last_iterate(std::move(last_iterate)) {}

    Eigen::VectorXd last_iterate;
};

}  // namespace pkb
