#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairswap {

enum class ErrorCode {
    // crypto
    EmptyPayload,
    KeyMismatch,
    CorruptEnvelope,
    // protocol
    BadRoleAssignment,
    EmptyWants,
    MismatchedWants,
    OutOfOrderMessage,
    UnknownSession,
    UnreachablePhase,
    // swarm
    InvalidConfig,
    NoUsefulPiece,
    NonConvergence,
    // metrics
    EmptyNetwork,
    NoSeeders,
    // experiments
    UnknownPreset,
    BadScenarioFile,
    IoError,
    MissingData,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace fairswap
