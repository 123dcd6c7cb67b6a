#pragma once

#include <stdexcept>
#include <string>

namespace rankscope {

/// Root of every error thrown by the library. Each subclass names one
/// failure mode so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by malformed input or configuration. The CLI maps these to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Errors raised when a computation cannot produce a finite or meaningful
/// result. The CLI maps these to exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

#define RANKSCOPE_DEFINE_ERROR(Name, Base) \
  class Name : public Base {               \
   public:                                 \
    using Base::Base;                      \
  };

// linalg
RANKSCOPE_DEFINE_ERROR(InvalidMatrix, UsageError)
RANKSCOPE_DEFINE_ERROR(InvalidExponent, UsageError)
// network
RANKSCOPE_DEFINE_ERROR(InvalidArchitecture, UsageError)
RANKSCOPE_DEFINE_ERROR(ShapeError, UsageError)
RANKSCOPE_DEFINE_ERROR(NotReLU, UsageError)
RANKSCOPE_DEFINE_ERROR(CompositionError, UsageError)
RANKSCOPE_DEFINE_ERROR(DepthError, UsageError)
RANKSCOPE_DEFINE_ERROR(CheckpointError, UsageError)
// training
RANKSCOPE_DEFINE_ERROR(InvalidConfig, UsageError)
RANKSCOPE_DEFINE_ERROR(LabelError, UsageError)
RANKSCOPE_DEFINE_ERROR(UnfitError, NumericError)
// rank
RANKSCOPE_DEFINE_ERROR(NoProbes, UsageError)
RANKSCOPE_DEFINE_ERROR(DegenerateBatch, UsageError)
RANKSCOPE_DEFINE_ERROR(TooFewPoints, UsageError)
RANKSCOPE_DEFINE_ERROR(DegenerateInputs, UsageError)
RANKSCOPE_DEFINE_ERROR(ProjectionError, NumericError)
// baselines
RANKSCOPE_DEFINE_ERROR(IllConditioned, NumericError)
// datagen
RANKSCOPE_DEFINE_ERROR(DimError, UsageError)
RANKSCOPE_DEFINE_ERROR(FormatError, UsageError)

#undef RANKSCOPE_DEFINE_ERROR

}  // namespace rankscope
