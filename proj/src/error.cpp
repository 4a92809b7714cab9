#include "rwde/error.hpp"

namespace rwde {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::CemeteryHasExit: return "CemeteryHasExit";
        case ErrorCode::NotConnectedToCemetery: return "NotConnectedToCemetery";
        case ErrorCode::InvalidWeight: return "InvalidWeight";
        case ErrorCode::UnknownVertex: return "UnknownVertex";
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::NotStronglyConnected: return "NotStronglyConnected";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::NotOnSimplex: return "NotOnSimplex";
        case ErrorCode::BoundaryPoint: return "BoundaryPoint";
        case ErrorCode::InvalidPartition: return "InvalidPartition";
        case ErrorCode::ZeroMass: return "ZeroMass";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::InconsistentSolvers: return "InconsistentSolvers";
        case ErrorCode::IdentityViolation: return "IdentityViolation";
        case ErrorCode::GraphTooLarge: return "GraphTooLarge";
        case ErrorCode::NotStronglyConnectedGraph: return "NotStronglyConnectedGraph";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::HasLoop: return "HasLoop";
        case ErrorCode::IntegrabilityGuardFailed: return "IntegrabilityGuardFailed";
        case ErrorCode::FormMismatch: return "FormMismatch";
        case ErrorCode::DegenerateTail: return "DegenerateTail";
        case ErrorCode::EmptyWindow: return "EmptyWindow";
        case ErrorCode::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

}  // namespace rwde
