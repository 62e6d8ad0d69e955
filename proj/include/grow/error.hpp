#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grow {

enum class ErrorCode {
  InvalidArgument,
  InvalidTarget,
  ScoreOutOfRange,
  UserNotFound,
  IllegalTransition,
  GatewayUnavailable,
  ProviderProtocolError,
  ScriptFormatError,
  DuplicateScriptEntry,
  NoPayload,
  InsufficientData,
  NotReady,
  WriteOutOfPhase,
  SchemaViolation,
  DuplicateWrite,
  UnknownGoal,
  UnknownTool,
  StorageUnavailable,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class GrowError : public std::runtime_error {
 public:
  GrowError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace grow
