#pragma once

#include <stdexcept>
#include <string>

namespace rabimet {

/// Base class for failures of a numerical routine on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive refinement ran out of subdivision budget.
class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Generalized Rabi frequency is zero (Omega = Delta = 0).
class DegenerateFrequency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Population pinned at 0 or 1 where the PDM Fisher ratio has no usable value.
class IndeterminateAtBoundary : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Finite-difference estimates at delta and delta/2 disagree beyond tolerance.
class StepTooCoarse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rabimet
