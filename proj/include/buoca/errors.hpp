#pragma once

#include <stdexcept>

namespace buoca {

// Error taxonomy mirrors the CLI exit codes: parse/validation -> 2,
// I/O -> 3, infeasible budgets and violated preconditions -> 4.

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed file content (bad CSV quoting, bad JSON, unparsable numbers).
struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

// Filesystem-level failures: missing files, unreadable/unwritable paths.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleBudgetError : PreconditionError {
  using PreconditionError::PreconditionError;
};

struct EnumerationCapError : PreconditionError {
  using PreconditionError::PreconditionError;
};

}  // namespace buoca
