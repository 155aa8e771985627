#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oboi {

enum class ErrorCode {
  kUnknownInstance,
  kUnknownObject,
  kRejectedValue,
  kShapeMismatch,
  kNotATensorFile,
  kCorruptTensor,
  kVersionMismatch,
  kMissingTensor,
  kInvalidManifest,
  kInvalidBox,
  kEmptySupport,
  kMissingLogits,
  kDuplicateInstance,
  kMissingStats,
  kNoCandidates,
  kIncompleteCoverage,
  kNotEnoughInstances,
  kEmptySplit,
  kUndefinedGain,
  kInvalidSpec,
  kInvalidConfig,
  kIo,
};

// Stable name used in machine-readable error output ("MissingTensor", ...).
std::string_view error_name(ErrorCode code);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace oboi
