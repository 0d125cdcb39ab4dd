#pragma once

#include <stdexcept>

namespace saddle {

// Error hierarchy. Everything derives from saddle::Error so callers can catch
// library failures without swallowing std::logic_error programming mistakes.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Linearly dependent input to an orthonormalization.
struct DegenerateInput : Error {
  using Error::Error;
};

/// Iterative eigensolver exceeded its sweep budget.
struct ConvergenceFailure : Error {
  using Error::Error;
};

/// A force evaluation produced a non-finite value.
struct SimulationFailure : Error {
  using Error::Error;
};

/// Cholesky failed even at the largest jitter.
struct FactorizationFailure : Error {
  using Error::Error;
};

/// The hyperparameter search found no finite likelihood.
struct FitFailure : Error {
  using Error::Error;
};

/// An iterate left the divergence bound.
struct Diverged : Error {
  using Error::Error;
};

/// Two training locations coincide (within 1e-12 in the max-norm).
struct DuplicatePoint : Error {
  using Error::Error;
};

}  // namespace saddle
