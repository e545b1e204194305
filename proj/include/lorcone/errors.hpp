#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lorcone {

enum class ErrorCode {
  InvalidInput,
  InvalidMetric,
  SizeLimit,
  GridTooCoarse,
  ZeroFunction,
  MollifyFailed,
  ResourceLimit,
  NotCausallyRelated,
  MixedModels,
  Unrealizable,
  DomainViolation,
  InsufficientSamples,
  NotCausallyCouplable,
  NoMaximizer,
  ZeroReferenceCell,
  NotTimelikeDualizable,
  AtomNotInPast,
  EmptyLevelSet,
  SlopeBoundViolated,
  BoundaryPoint,
  DivisionNearZero,
  Io,
};

// Stable machine-readable name, used by the CLI and in reports.
std::string_view code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
  Error(ErrorCode c, const std::string& msg) : std::runtime_error(msg), code_(c) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace lorcone
