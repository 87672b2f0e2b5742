#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rppg {

enum class ErrorCode {
  kMissingPath,
  kInvalidManifest,
  kCorruptFrame,
  kLabelParseError,
  kRateMismatch,
  kInsufficientCoverage,
  kEmptyRoi,
  kTooShort,
  kBadMagic,
  kVersionMismatch,
  kTruncatedFile,
  kDegenerateInput,
  kWindowTooLong,
  kRankDeficient,
  kConvergenceFailure,
  kInvalidBand,
  kEmptyBand,
  kConfigInvalid,
  kParseError,
  kUsage,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so batch
// drivers can route it to the exclusion log by stage and kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace rppg
