#pragma once

#include <stdexcept>
#include <string>

namespace entropy_engine {

/// Base class for every error raised by the engine.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: unknown ids, bad rationals, facts that
/// violate element conservation, schema problems. Maps to CLI exit code 2.
class InputError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Closure produced more facts (or a larger universe) than the configured
/// budget allows. The caller has to shrink the lambda grid or max_parts.
class BudgetExceeded : public EngineError {
 public:
  using EngineError::EngineError;
};

/// A query that is not meaningful for the current object state, e.g.
/// asking an unclosed relation or a state outside the generated universe.
class QueryError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Numerical failure: point outside an open domain, step rejection,
/// boundary maximiser, non-positive temperature.
class NumericError : public EngineError {
 public:
  using EngineError::EngineError;
};

}  // namespace entropy_engine
