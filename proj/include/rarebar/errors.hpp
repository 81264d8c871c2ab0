#pragma once

#include <stdexcept>
#include <string>

namespace rarebar {

/// Estimator failed to reach the target event within the level budget.
/// Carries the partial level structure through the message; callers that
/// need the records catch the typed exception from run_subsim.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive thresholds stopped increasing between levels.
class StagnationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive sampling hit its budget before reaching the target accuracy.
class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rarebar
