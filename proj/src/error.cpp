#include "fairswap/error.hpp"

namespace fairswap {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyPayload: return "EmptyPayload";
        case ErrorCode::KeyMismatch: return "KeyMismatch";
        case ErrorCode::CorruptEnvelope: return "CorruptEnvelope";
        case ErrorCode::BadRoleAssignment: return "BadRoleAssignment";
        case ErrorCode::EmptyWants: return "EmptyWants";
        case ErrorCode::MismatchedWants: return "MismatchedWants";
        case ErrorCode::OutOfOrderMessage: return "OutOfOrderMessage";
        case ErrorCode::UnknownSession: return "UnknownSession";
        case ErrorCode::UnreachablePhase: return "UnreachablePhase";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::NoUsefulPiece: return "NoUsefulPiece";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::EmptyNetwork: return "EmptyNetwork";
        case ErrorCode::NoSeeders: return "NoSeeders";
        case ErrorCode::UnknownPreset: return "UnknownPreset";
        case ErrorCode::BadScenarioFile: return "BadScenarioFile";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::MissingData: return "MissingData";
    }
    return "Unknown";
}

}  // namespace fairswap
