#pragma once

#include <stdexcept>
#include <string>

namespace ltomo {

// Base for every library-raised failure; CLI maps subtypes to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid inputs (caller bugs or bad configuration).
struct InvalidArgs : Error {
  using Error::Error;
};
struct DimensionMismatch : InvalidArgs {
  using InvalidArgs::InvalidArgs;
};
struct InvalidWeight : InvalidArgs {
  using InvalidArgs::InvalidArgs;
};
struct UnsupportedDimension : InvalidArgs {
  using InvalidArgs::InvalidArgs;
};
struct UnphysicalVector : InvalidArgs {
  using InvalidArgs::InvalidArgs;
};
struct RankTooSmall : InvalidArgs {
  using InvalidArgs::InvalidArgs;
};
struct DivisionByZero : InvalidArgs {
  using InvalidArgs::InvalidArgs;
};

// Numerical failures (well-formed inputs on which the computation breaks down).
struct NumericalError : Error {
  using Error::Error;
};
struct PureStateNoRestFrame : NumericalError {
  using NumericalError::NumericalError;
};
struct SingularState : NumericalError {
  using NumericalError::NumericalError;
};
struct ZeroRate : NumericalError {
  using NumericalError::NumericalError;
};
struct NoConvergence : NumericalError {
  using NumericalError::NumericalError;
};
struct RankDeficientData : NumericalError {
  using NumericalError::NumericalError;
};
struct ZeroSurvival : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace ltomo
