#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skembed {

enum class ErrorCode {
    InvalidDimension,
    DegenerateDomain,
    ZeroVector,
    UnsupportedAtom,
    MassMismatch,
    SizeCapExceeded,
    NumericalBreakdown,
    NotEmbeddingShaped,
    InvalidProgram,
    SupportOffLattice,
    NonProbability,
    NotSymmetric,
    InfeasibleEmbedding,
    NotOptimal,
    SingularSystem,
    ZeroStart,
    WrongRegime,
    EmptyMeasure,
    ProfileUnreachable,
    BallEscapesDomain,
    EmptyShell,
    NotConverged,
    PolicyGap,
    InvalidArgument,
    ParseError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying one of the library's named failure modes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace skembed
