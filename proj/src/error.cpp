#include "grow/error.hpp"

namespace grow {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::UserNotFound: return "UserNotFound";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::GatewayUnavailable: return "GatewayUnavailable";
    case ErrorCode::ProviderProtocolError: return "ProviderProtocolError";
    case ErrorCode::ScriptFormatError: return "ScriptFormatError";
    case ErrorCode::DuplicateScriptEntry: return "DuplicateScriptEntry";
    case ErrorCode::NoPayload: return "NoPayload";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NotReady: return "NotReady";
    case ErrorCode::WriteOutOfPhase: return "WriteOutOfPhase";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateWrite: return "DuplicateWrite";
    case ErrorCode::UnknownGoal: return "UnknownGoal";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::StorageUnavailable: return "StorageUnavailable";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace grow
