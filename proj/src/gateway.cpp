#include "grow/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "grow/error.hpp"

namespace grow {
namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void script_error(const std::string& message) {
  throw GrowError(ErrorCode::ScriptFormatError, message);
}

ScriptEntry parse_entry(const json& j, std::size_t index) {
  const std::string where = "script entry " + std::to_string(index);
  if (!j.is_object() || !j.contains("match") || !j.contains("result")) {
    script_error(where + ": expected {match, result}");
  }
  const json& m = j.at("match");
  if (!m.is_object() || !m.contains("phase") || !m.at("phase").is_string()) {
    script_error(where + ": match.phase is required");
  }
  ScriptEntry entry;
  auto phase = parse_enum<Phase>(m.at("phase").get<std::string>());
  if (!phase) script_error(where + ": unknown phase");
  entry.match.phase = *phase;

  const bool has_turn = m.contains("turn");
  const bool has_pattern = m.contains("pattern");
  if (has_turn == has_pattern) script_error(where + ": give exactly one of turn or pattern");
  if (has_turn) {
    if (!m.at("turn").is_number_unsigned()) script_error(where + ": turn must be a non-negative integer");
    entry.match.turn = m.at("turn").get<std::size_t>();
  } else {
    if (!m.at("pattern").is_string() || m.at("pattern").get<std::string>().empty()) {
      script_error(where + ": pattern must be a non-empty string");
    }
    entry.match.pattern = m.at("pattern").get<std::string>();
  }

  try {
    entry.result = j.at("result").get<LlmResult>();
  } catch (const json::exception& e) {
    script_error(where + ": bad result: " + e.what());
  }
  return entry;
}

}  // namespace

json to_wire_request(const PromptBundle& bundle, const LlmParams& params) {
  json messages = json::array();
  std::string system = bundle.system_text;
  if (!bundle.task_text.empty()) {
    if (!system.empty()) system += "\n\n";
    system += bundle.task_text;
  }
  if (!system.empty()) messages.push_back({{"role", "system"}, {"content", system}});
  for (const auto& m : bundle.few_shot) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  if (!bundle.user_text.empty()) {
    messages.push_back({{"role", "user"}, {"content", bundle.user_text}});
  }

  json request = {{"model", params.model_name},
                  {"temperature", params.temperature},
                  {"max_tokens", params.max_tokens},
                  {"messages", messages}};
  if (!bundle.tool_schema.is_null()) {
    request["tools"] = json::array(
        {{{"type", "function"},
          {"function",
           {{"name", kSaveProfileTool},
            {"description", "Persist the profile fields collected in the current coaching phase."},
            {"parameters", bundle.tool_schema}}}}});
  }
  return request;
}

void to_json(json& j, const LlmResult& r) {
  json calls = json::array();
  for (const auto& c : r.tool_calls) calls.push_back({{"tool_name", c.tool_name}, {"payload", c.payload}});
  j = json{{"text", r.text}, {"tool_calls", calls}};
}

void from_json(const json& j, LlmResult& r) {
  r.text = j.value("text", std::string{});
  r.tool_calls.clear();
  if (j.contains("tool_calls")) {
    for (const auto& c : j.at("tool_calls")) {
      r.tool_calls.push_back({c.at("tool_name").get<std::string>(), c.at("payload")});
    }
  }
}

const LlmResult& Script::lookup(Phase phase, std::size_t turn, std::string_view user_text) const {
  for (const auto& e : entries) {
    if (e.match.phase == phase && e.match.turn == turn) return e.result;
  }
  const std::string haystack = lowercase(user_text);
  for (const auto& e : entries) {
    if (e.match.phase == phase && e.match.pattern &&
        haystack.find(lowercase(*e.match.pattern)) != std::string::npos) {
      return e.result;
    }
  }
  return fallback;
}

Script parse_script(std::string_view text) {
  Script script;
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    return script;
  }
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) script_error("script is not valid JSON");
  if (!doc.is_object() || !doc.contains("entries") || !doc.at("entries").is_array()) {
    script_error("script must be an object with an 'entries' array");
  }

  std::set<std::pair<Phase, std::size_t>> turn_keys;
  std::set<std::pair<Phase, std::string>> pattern_keys;
  std::size_t index = 0;
  for (const auto& item : doc.at("entries")) {
    ScriptEntry entry = parse_entry(item, index++);
    const bool fresh =
        entry.match.turn
            ? turn_keys.emplace(entry.match.phase, *entry.match.turn).second
            : pattern_keys.emplace(entry.match.phase, lowercase(*entry.match.pattern)).second;
    if (!fresh) {
      throw GrowError(ErrorCode::DuplicateScriptEntry,
                      "duplicate match key in script entry " + std::to_string(index - 1) + " (" +
                          std::string(to_string(entry.match.phase)) + ")");
    }
    script.entries.push_back(std::move(entry));
  }
  if (doc.contains("fallback")) {
    try {
      script.fallback = doc.at("fallback").get<LlmResult>();
    } catch (const json::exception& e) {
      script_error(std::string("bad fallback: ") + e.what());
    }
    if (!script.fallback.tool_calls.empty()) script_error("fallback must not carry tool calls");
  }
  return script;
}

Script load_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) script_error("cannot open script " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_script(buf.str());
}

LlmResult ScriptedGateway::complete(const PromptBundle& bundle, const LlmParams&) {
  if (bundle.empty()) return LlmResult{script_.fallback.text, {}};
  return script_.lookup(bundle.phase, bundle.phase_turn, bundle.user_text);
}

std::optional<ExtractedPayload> repair_tool_payload(std::string_view raw_text) {
  std::size_t start = raw_text.find('{');
  while (start != std::string_view::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t close = std::string_view::npos;
    for (std::size_t i = start; i < raw_text.size(); ++i) {
      const char c = raw_text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        close = i;
        break;
      }
    }
    // Unterminated: every later brace sits inside this object, so nothing
    // after it can be a complete document either.
    if (close == std::string_view::npos) return std::nullopt;

    json doc = json::parse(raw_text.substr(start, close - start + 1), nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) {
      return ExtractedPayload{std::move(doc), start, close + 1};
    }
    start = raw_text.find('{', start + 1);
  }
  return std::nullopt;
}

}  // namespace grow
