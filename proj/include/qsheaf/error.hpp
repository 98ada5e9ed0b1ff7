#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsheaf {

enum class ErrorCode {
  Dimension,
  Validation,
  UnsupportedCell,
  MalformedCell,
  MissingState,
  AlignmentFailure,
  NoWitness,
  UndefinedCapacity,
  UndefinedBound,
  Divergence,
  Scale,
  UnsupportedDimension,
  NoPartition,
  Payload,
  Parse,
  Internal,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::Dimension: return "dimension";
  case ErrorCode::Validation: return "validation";
  case ErrorCode::UnsupportedCell: return "unsupported-cell";
  case ErrorCode::MalformedCell: return "malformed-cell";
  case ErrorCode::MissingState: return "missing-state";
  case ErrorCode::AlignmentFailure: return "alignment-failure";
  case ErrorCode::NoWitness: return "no-witness";
  case ErrorCode::UndefinedCapacity: return "undefined-capacity";
  case ErrorCode::UndefinedBound: return "undefined-bound";
  case ErrorCode::Divergence: return "divergence";
  case ErrorCode::Scale: return "scale";
  case ErrorCode::UnsupportedDimension: return "unsupported-dimension";
  case ErrorCode::NoPartition: return "no-partition";
  case ErrorCode::Payload: return "payload";
  case ErrorCode::Parse: return "parse";
  case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

/// Single exception type for the library; `code()` tells callers which
/// contract was broken.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + " error: " + what),
        code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the "<code> error: " prefix.
  const std::string &message() const noexcept { return message_; }

private:
  ErrorCode code_;
  std::string message_;
};

/// Raised by decode when the coboundary system cannot absorb the remainder.
class AlignmentFailure : public Error {
public:
  AlignmentFailure(double residual, const std::string &what)
      : Error(ErrorCode::AlignmentFailure, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what) {
  throw Error(code, what);
}

} // namespace qsheaf
