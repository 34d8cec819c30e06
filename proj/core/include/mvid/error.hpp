#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvid {

// Every failure surfaced by the library carries one of these codes. The CLI
// maps each code to its own process exit status (see exit_code()).
enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kEmptySparse,
  kAllZeroPrediction,
  kDuplicateAnchorPixel,
  kEmptyMask,
  kEmptyList,
  kConfigMismatch,
  kNonFiniteLoss,
  kBadFormat,
  kUnsupportedBitDepth,
  kIoFailure,
  kParseError,
  kNonPositiveDepth,
  kBadMagic,
  kVersionMismatch,
  kCorruptDirectory,
};

std::string_view error_name(ErrorCode code);

// Process exit status for a given error class. 0 is reserved for success and
// 1 for errors that did not originate in the library.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(error_name(code)) + ": " + what);
}

}  // namespace mvid
