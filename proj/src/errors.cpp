#include "lorcone/errors.hpp"

namespace lorcone {

std::string_view code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidInput: return "INVALID_INPUT";
    case ErrorCode::InvalidMetric: return "INVALID_METRIC";
    case ErrorCode::SizeLimit: return "SIZE_LIMIT";
    case ErrorCode::GridTooCoarse: return "GRID_TOO_COARSE";
    case ErrorCode::ZeroFunction: return "ZERO_FUNCTION";
    case ErrorCode::MollifyFailed: return "MOLLIFY_FAILED";
    case ErrorCode::ResourceLimit: return "RESOURCE_LIMIT";
    case ErrorCode::NotCausallyRelated: return "NOT_CAUSALLY_RELATED";
    case ErrorCode::MixedModels: return "MIXED_MODELS";
    case ErrorCode::Unrealizable: return "UNREALIZABLE";
    case ErrorCode::DomainViolation: return "DOMAIN_VIOLATION";
    case ErrorCode::InsufficientSamples: return "INSUFFICIENT_SAMPLES";
    case ErrorCode::NotCausallyCouplable: return "NOT_CAUSALLY_COUPLABLE";
    case ErrorCode::NoMaximizer: return "NO_MAXIMIZER";
    case ErrorCode::ZeroReferenceCell: return "ZERO_REFERENCE_CELL";
    case ErrorCode::NotTimelikeDualizable: return "NOT_TIMELIKE_DUALIZABLE";
    case ErrorCode::AtomNotInPast: return "ATOM_NOT_IN_PAST";
    case ErrorCode::EmptyLevelSet: return "EMPTY_LEVEL_SET";
    case ErrorCode::SlopeBoundViolated: return "SLOPE_BOUND_VIOLATED";
    case ErrorCode::BoundaryPoint: return "BOUNDARY_POINT";
    case ErrorCode::DivisionNearZero: return "DIVISION_NEAR_ZERO";
    case ErrorCode::Io: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace lorcone
