#pragma once

#include <stdexcept>
#include <string>

namespace pardpp {

// Base of every error raised by the library. Callers that only need to
// distinguish "bad input/model" from programming errors can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PARDPP_DEFINE_ERROR(Name)              \
  class Name : public Error {                  \
   public:                                     \
    explicit Name(const std::string& what_arg) \
        : Error(#Name ": " + what_arg) {}      \
  }

// numerics
PARDPP_DEFINE_ERROR(InvalidArgument);
PARDPP_DEFINE_ERROR(InvalidMatrix);
PARDPP_DEFINE_ERROR(SingularMatrix);
PARDPP_DEFINE_ERROR(SingularBlock);
PARDPP_DEFINE_ERROR(IllConditioned);
PARDPP_DEFINE_ERROR(ProbabilityOutOfRange);
PARDPP_DEFINE_ERROR(ParseError);

// models
PARDPP_DEFINE_ERROR(InvalidConstraint);
PARDPP_DEFINE_ERROR(ZeroConditional);
PARDPP_DEFINE_ERROR(ZeroMassCondition);
PARDPP_DEFINE_ERROR(NegativeMass);

// samplers
PARDPP_DEFINE_ERROR(ZeroMass);
PARDPP_DEFINE_ERROR(RoundBudgetExceeded);
PARDPP_DEFINE_ERROR(BatchRejected);
PARDPP_DEFINE_ERROR(InvariantViolation);

// validation
PARDPP_DEFINE_ERROR(GroundSetTooLarge);
PARDPP_DEFINE_ERROR(MixedSizes);
PARDPP_DEFINE_ERROR(SupportMismatch);
PARDPP_DEFINE_ERROR(BadParity);

// planar matchings
PARDPP_DEFINE_ERROR(NotPlanar);
PARDPP_DEFINE_ERROR(OddVertexCount);
PARDPP_DEFINE_ERROR(NoPerfectMatching);

#undef PARDPP_DEFINE_ERROR

}  // namespace pardpp
