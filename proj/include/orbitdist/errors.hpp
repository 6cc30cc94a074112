#pragma once

#include <stdexcept>
#include <string>

namespace orbitdist {

// Every failure raised by the library derives from this type so callers can
// catch the whole family; the concrete class names the condition.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ORBITDIST_ERROR(Name)                     \
  class Name : public error {                     \
   public:                                        \
    explicit Name(const std::string& what)        \
        : error(std::string(#Name ": ") + what) {} \
  }

ORBITDIST_ERROR(NonHermitianInput);
ORBITDIST_ERROR(NonUnitaryInput);
ORBITDIST_ERROR(NegativeInput);
ORBITDIST_ERROR(SingularInput);
ORBITDIST_ERROR(BranchCut);
ORBITDIST_ERROR(NotAContraction);
ORBITDIST_ERROR(MassMismatch);
ORBITDIST_ERROR(LengthMismatch);
ORBITDIST_ERROR(DimensionMismatch);
ORBITDIST_ERROR(ParamsMismatch);
ORBITDIST_ERROR(InvalidParams);
ORBITDIST_ERROR(MembershipViolation);
ORBITDIST_ERROR(NotDominating);
ORBITDIST_ERROR(RefinementExhausted);
ORBITDIST_ERROR(ClusterGapFailure);
ORBITDIST_ERROR(SchemaError);

#undef ORBITDIST_ERROR

}  // namespace orbitdist
