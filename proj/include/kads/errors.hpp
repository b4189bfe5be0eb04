#pragma once

#include <stdexcept>
#include <string>

namespace kads {

/// Base of every error the library throws. kind() is a stable tag used by the CLI.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define KADS_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                          \
    public:                                                              \
        using Error::Error;                                              \
        const char* kind() const noexcept override { return #Name; }     \
    };

KADS_DEFINE_ERROR(Inadmissible)
KADS_DEFINE_ERROR(DomainError)
KADS_DEFINE_ERROR(NonConvergence)
KADS_DEFINE_ERROR(ResolutionTooCoarse)
KADS_DEFINE_ERROR(RecurrenceBreakdown)
KADS_DEFINE_ERROR(TruncationError)
KADS_DEFINE_ERROR(StepSizeCollapse)
KADS_DEFINE_ERROR(NonNegativeLambdaTilde)
KADS_DEFINE_ERROR(EnvelopeViolation)
KADS_DEFINE_ERROR(CertificateFailure)
KADS_DEFINE_ERROR(MatchError)
KADS_DEFINE_ERROR(NoBracket)
KADS_DEFINE_ERROR(ReboundDetected)
KADS_DEFINE_ERROR(BisectionStall)
KADS_DEFINE_ERROR(ConfigError)

#undef KADS_DEFINE_ERROR

} // namespace kads
