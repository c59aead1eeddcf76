#include "skembed/error.hpp"

namespace skembed {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidDimension: return "InvalidDimension";
        case ErrorCode::DegenerateDomain: return "DegenerateDomain";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::UnsupportedAtom: return "UnsupportedAtom";
        case ErrorCode::MassMismatch: return "MassMismatch";
        case ErrorCode::SizeCapExceeded: return "SizeCapExceeded";
        case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
        case ErrorCode::NotEmbeddingShaped: return "NotEmbeddingShaped";
        case ErrorCode::InvalidProgram: return "InvalidProgram";
        case ErrorCode::SupportOffLattice: return "SupportOffLattice";
        case ErrorCode::NonProbability: return "NonProbability";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::InfeasibleEmbedding: return "InfeasibleEmbedding";
        case ErrorCode::NotOptimal: return "NotOptimal";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::ZeroStart: return "ZeroStart";
        case ErrorCode::WrongRegime: return "WrongRegime";
        case ErrorCode::EmptyMeasure: return "EmptyMeasure";
        case ErrorCode::ProfileUnreachable: return "ProfileUnreachable";
        case ErrorCode::BallEscapesDomain: return "BallEscapesDomain";
        case ErrorCode::EmptyShell: return "EmptyShell";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::PolicyGap: return "PolicyGap";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace skembed
