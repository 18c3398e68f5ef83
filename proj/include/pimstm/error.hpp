#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pimstm {

enum class ErrorCode {
  kOutOfBounds,
  kMisaligned,
  kOutOfMemory,
  kReleaseNotOwned,
  kSelfDeadlock,
  kInvalidTaskletCount,
  kTaskletFailed,
  kConfigInvalid,
  kNestedTransaction,
  kNoActiveTransaction,
  kCapacityExceeded,
  kRetryLimitExceeded,
  kTimeBudgetExceeded,
  kSearchSpaceExceeded,
  kParseError,
  kOracleViolation,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pimstm
