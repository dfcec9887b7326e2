#pragma once

#include <stdexcept>
#include <string>

namespace jlt {

// Base for every failure raised by the library. The CLI maps the two
// subclasses below to distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: constructor preconditions, domain errors, unsupported options.
class InputError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure did not reach its target (truncation, identities).
class NumericalError : public Error {
 public:
  using Error::Error;
};

#define JLT_DEFINE_ERROR(Name, Base)                         \
  class Name : public Base {                                 \
   public:                                                   \
    explicit Name(const std::string& what) : Base(#Name ": " + what) {} \
  };

JLT_DEFINE_ERROR(NonNegativeOffDiagonal, InputError)
JLT_DEFINE_ERROR(LengthMismatch, InputError)
JLT_DEFINE_ERROR(NotHermitian, InputError)
JLT_DEFINE_ERROR(SingularBlock, InputError)
JLT_DEFINE_ERROR(DomainError, InputError)
JLT_DEFINE_ERROR(UnsupportedGamma, InputError)
JLT_DEFINE_ERROR(OffDiagonalSignLoss, InputError)
JLT_DEFINE_ERROR(NoEigenvalue, InputError)

JLT_DEFINE_ERROR(NoConvergence, NumericalError)
JLT_DEFINE_ERROR(PositivityViolation, NumericalError)
JLT_DEFINE_ERROR(IdentityViolation, NumericalError)
JLT_DEFINE_ERROR(ChainStalled, NumericalError)
JLT_DEFINE_ERROR(NotPositiveDefinite, NumericalError)
JLT_DEFINE_ERROR(RecursionOverflow, NumericalError)

#undef JLT_DEFINE_ERROR

}  // namespace jlt
