#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srcloc {

enum class ErrorCode {
  DegenerateGeometry,
  SingularGeometry,
  InsufficientAnchors,
  InvalidSpeedField,
  InvalidStart,
  InvalidArgument,
  PlacementInfeasible,
  UnstableIntegration,
  NoSpiral,
  NotActivated,
  FrameDecodeError,
  FrameShapeError,
  EmptyGrowth,
  ParseError,
  IoError,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::SingularGeometry: return "SingularGeometry";
    case ErrorCode::InsufficientAnchors: return "InsufficientAnchors";
    case ErrorCode::InvalidSpeedField: return "InvalidSpeedField";
    case ErrorCode::InvalidStart: return "InvalidStart";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::PlacementInfeasible: return "PlacementInfeasible";
    case ErrorCode::UnstableIntegration: return "UnstableIntegration";
    case ErrorCode::NoSpiral: return "NoSpiral";
    case ErrorCode::NotActivated: return "NotActivated";
    case ErrorCode::FrameDecodeError: return "FrameDecodeError";
    case ErrorCode::FrameShapeError: return "FrameShapeError";
    case ErrorCode::EmptyGrowth: return "EmptyGrowth";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// CLI prints `name()` verbatim on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace srcloc
