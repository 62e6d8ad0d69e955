#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "grow/domain.hpp"

namespace grow {

using json = nlohmann::json;

inline constexpr std::string_view kSaveProfileTool = "saveProfile";

// Set from configuration only; the model never adjusts these.
struct LlmParams {
  double temperature = 0.7;
  int max_tokens = 512;
  std::string model_name = "gpt-4o-mini";
};

struct PromptMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const PromptMessage&) const = default;
};

// Everything one model call needs. Produced by build_prompt().
struct PromptBundle {
  Phase phase = Phase::Introduction;
  // Number of model calls already made in this phase of the session. The
  // scripted backend keys on it; the session owns the counter.
  std::size_t phase_turn = 0;
  std::string system_text;
  std::string task_text;
  std::vector<PromptMessage> few_shot;
  // Latest user message; empty for the session-opening greeting.
  std::string user_text;
  // JSON schema of the saveProfile arguments; null when the phase permits no writes.
  json tool_schema;

  bool empty() const { return system_text.empty() && task_text.empty() && user_text.empty(); }
};

// Chat-completions request body for |bundle|.
json to_wire_request(const PromptBundle& bundle, const LlmParams& params);

struct ToolCall {
  std::string tool_name;
  json payload;

  bool operator==(const ToolCall&) const = default;
};

struct LlmResult {
  std::string text;
  std::vector<ToolCall> tool_calls;

  bool operator==(const LlmResult&) const = default;
};

void to_json(json& j, const LlmResult& r);
void from_json(const json& j, LlmResult& r);

class ModelGateway {
 public:
  virtual ~ModelGateway() = default;

  // Throws GrowError(GatewayUnavailable) or GrowError(ProviderProtocolError).
  virtual LlmResult complete(const PromptBundle& bundle, const LlmParams& params) = 0;
};

// ---------------------------------------------------------------------------
// Scripted backend

struct ScriptMatch {
  Phase phase = Phase::Introduction;
  std::optional<std::size_t> turn;
  // Case-insensitive substring of the user text.
  std::optional<std::string> pattern;
};

struct ScriptEntry {
  ScriptMatch match;
  LlmResult result;
};

struct Script {
  std::vector<ScriptEntry> entries;
  LlmResult fallback{"I'm here with you. Could you tell me a little more?", {}};

  // Turn-keyed entries win over pattern entries; patterns are tried in file order.
  const LlmResult& lookup(Phase phase, std::size_t turn, std::string_view user_text) const;
};

// Throws GrowError(ScriptFormatError) or GrowError(DuplicateScriptEntry).
Script parse_script(std::string_view text);
Script load_script(const std::filesystem::path& path);

class ScriptedGateway : public ModelGateway {
 public:
  explicit ScriptedGateway(Script script) : script_(std::move(script)) {}

  LlmResult complete(const PromptBundle& bundle, const LlmParams& params) override;

  const Script& script() const noexcept { return script_; }

 private:
  Script script_;
};

// ---------------------------------------------------------------------------

struct ExtractedPayload {
  json document;
  std::size_t begin = 0;  // byte span of the document inside the scanned text
  std::size_t end = 0;
};

// First well-formed JSON object embedded in |raw_text|. Nothing is repaired or
// completed: a truncated object yields nullopt (NoPayload).
std::optional<ExtractedPayload> repair_tool_payload(std::string_view raw_text);

}  // namespace grow
