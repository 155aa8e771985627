#include "oboi/error.h"

namespace oboi {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownInstance: return "UnknownInstance";
    case ErrorCode::kUnknownObject: return "UnknownObject";
    case ErrorCode::kRejectedValue: return "RejectedValue";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNotATensorFile: return "NotATensorFile";
    case ErrorCode::kCorruptTensor: return "CorruptTensor";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kMissingTensor: return "MissingTensor";
    case ErrorCode::kInvalidManifest: return "InvalidManifest";
    case ErrorCode::kInvalidBox: return "InvalidBox";
    case ErrorCode::kEmptySupport: return "EmptySupport";
    case ErrorCode::kMissingLogits: return "MissingLogits";
    case ErrorCode::kDuplicateInstance: return "DuplicateInstance";
    case ErrorCode::kMissingStats: return "MissingStats";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kIncompleteCoverage: return "IncompleteCoverage";
    case ErrorCode::kNotEnoughInstances: return "NotEnoughInstances";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kUndefinedGain: return "UndefinedGain";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace oboi
