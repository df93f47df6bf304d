#pragma once

#include <stdexcept>
#include <string>

namespace dsa {

// Base class for every error raised by the library. The derived types carry
// no extra state; they exist so callers and tests can catch a specific failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define DSA_DEFINE_ERROR(Name)                                                 \
    class Name : public Error {                                                \
    public:                                                                    \
        using Error::Error;                                                    \
    }

DSA_DEFINE_ERROR(InvalidArgument);
DSA_DEFINE_ERROR(SubsetOutOfRange);
DSA_DEFINE_ERROR(ActionOutOfRange);
DSA_DEFINE_ERROR(AllocationOverflow);
DSA_DEFINE_ERROR(ShapeMismatch);
DSA_DEFINE_ERROR(ActionIndexOutOfRange);
DSA_DEFINE_ERROR(UnknownState);
DSA_DEFINE_ERROR(UnsupportedGeometry);
DSA_DEFINE_ERROR(NoFeasibleSteps);
DSA_DEFINE_ERROR(LengthMismatch);
DSA_DEFINE_ERROR(ParseError);
DSA_DEFINE_ERROR(ValidationError);
DSA_DEFINE_ERROR(IoError);

#undef DSA_DEFINE_ERROR

} // namespace dsa
