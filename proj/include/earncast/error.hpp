#pragma once

#include <stdexcept>
#include <string>

namespace earncast {

enum class ErrorKind {
  kParse,
  kDuplicateName,
  kUnknownVariable,
  kMalformedQuarter,
  kMissingDenominator,
  kInsufficientData,
  kDegenerateInput,
  kDimensionMismatch,
  kInvalidParams,
  kWindowTooSmall,
  kInsufficientHistory,
  kInvalidSpec,
  kInvalidConfig,
  kIo,
  kMissingRecords,
  kAllTrialsFailed,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace earncast
