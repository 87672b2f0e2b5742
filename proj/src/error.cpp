#include "rppg/error.hpp"

namespace rppg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingPath: return "MissingPath";
    case ErrorCode::kInvalidManifest: return "InvalidManifest";
    case ErrorCode::kCorruptFrame: return "CorruptFrame";
    case ErrorCode::kLabelParseError: return "LabelParseError";
    case ErrorCode::kRateMismatch: return "RateMismatch";
    case ErrorCode::kInsufficientCoverage: return "InsufficientCoverage";
    case ErrorCode::kEmptyRoi: return "EmptyRoi";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kWindowTooLong: return "WindowTooLong";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kInvalidBand: return "InvalidBand";
    case ErrorCode::kEmptyBand: return "EmptyBand";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUsage: return "Usage";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace rppg
