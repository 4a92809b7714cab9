#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rwde {

enum class ErrorCode {
    CemeteryHasExit,
    NotConnectedToCemetery,
    InvalidWeight,
    UnknownVertex,
    EmptySet,
    NotStronglyConnected,
    InvalidParams,
    NotOnSimplex,
    BoundaryPoint,
    InvalidPartition,
    ZeroMass,
    SingularSystem,
    InconsistentSolvers,
    IdentityViolation,
    GraphTooLarge,
    NotStronglyConnectedGraph,
    NotSymmetric,
    HasLoop,
    IntegrabilityGuardFailed,
    FormMismatch,
    DegenerateTail,
    EmptyWindow,
    InvalidInput,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code and,
/// where it applies, the name of the offending vertex or edge.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, std::string subject = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          code_(code), subject_(std::move(subject)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& subject() const noexcept { return subject_; }

private:
    ErrorCode code_;
    std::string subject_;
};

}  // namespace rwde
