#include "grow/http_gateway.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "grow/error.hpp"

namespace grow {
namespace {

void split_url(const std::string& url, std::string& host, std::string& path) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw GrowError(ErrorCode::ConfigError, "endpoint must include a scheme: " + url);
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  host = url.substr(0, path_begin);
  path = path_begin == std::string::npos ? "/" : url.substr(path_begin);
}

bool is_transient(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpGatewayConfig HttpGatewayConfig::from_env() {
  HttpGatewayConfig config;
  const char* endpoint = std::getenv("GROW_LLM_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') {
    throw GrowError(ErrorCode::ConfigError, "GROW_LLM_ENDPOINT is not set");
  }
  config.endpoint = endpoint;
  if (const char* key = std::getenv("GROW_LLM_API_KEY")) config.api_key = key;
  return config;
}

LlmResult parse_chat_completion(const json& body) {
  if (!body.is_object() || !body.contains("choices") || !body.at("choices").is_array() ||
      body.at("choices").empty()) {
    throw GrowError(ErrorCode::ProviderProtocolError, "response has no choices");
  }
  const json& choice = body.at("choices").front();
  if (!choice.is_object() || !choice.contains("message") || !choice.at("message").is_object()) {
    throw GrowError(ErrorCode::ProviderProtocolError, "choice has no message");
  }
  const json& message = choice.at("message");

  LlmResult result;
  if (message.contains("content") && !message.at("content").is_null()) {
    if (!message.at("content").is_string()) {
      throw GrowError(ErrorCode::ProviderProtocolError, "message content is not a string");
    }
    result.text = message.at("content").get<std::string>();
  }
  if (!message.contains("tool_calls") || message.at("tool_calls").is_null()) return result;
  if (!message.at("tool_calls").is_array()) {
    throw GrowError(ErrorCode::ProviderProtocolError, "tool_calls is not an array");
  }
  for (const auto& call : message.at("tool_calls")) {
    if (!call.contains("function") || !call.at("function").contains("name")) {
      throw GrowError(ErrorCode::ProviderProtocolError, "tool call without function name");
    }
    const json& fn = call.at("function");
    json args = fn.contains("arguments") && fn.at("arguments").is_string()
                    ? json::parse(fn.at("arguments").get<std::string>(), nullptr, false)
                    : json(json::value_t::discarded);
    if (args.is_discarded() || !args.is_object()) {
      spdlog::warn("dropping tool call {} with malformed arguments", fn.at("name").dump());
      continue;
    }
    result.tool_calls.push_back({fn.at("name").get<std::string>(), std::move(args)});
  }
  return result;
}

HttpGateway::HttpGateway(HttpGatewayConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.max_attempts < 1) config_.max_attempts = 1;
  split_url(config_.endpoint, host_, path_);
}

LlmResult HttpGateway::complete(const PromptBundle& bundle, const LlmParams& params) {
  if (bundle.empty()) {
    throw GrowError(ErrorCode::ProviderProtocolError, "refusing to send an empty prompt");
  }
  const std::string body = to_wire_request(bundle, params).dump();

  httplib::Client client(host_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto backoff = config_.initial_backoff;
  std::string last_failure;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    ++attempts_;
    auto res = client.Post(path_, headers, body, "application/json");
    if (res && res->status == 200) {
      json parsed = json::parse(res->body, nullptr, false);
      if (parsed.is_discarded()) {
        throw GrowError(ErrorCode::ProviderProtocolError, "response body is not JSON");
      }
      return parse_chat_completion(parsed);
    }
    if (res && !is_transient(res->status)) {
      throw GrowError(ErrorCode::ProviderProtocolError,
                      "provider returned HTTP " + std::to_string(res->status));
    }
    last_failure = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    spdlog::warn("model request attempt {}/{} failed: {}", attempt, config_.max_attempts,
                 last_failure);
    if (attempt < config_.max_attempts) {
      sleeper_(backoff);
      backoff *= 2;
    }
  }
  throw GrowError(ErrorCode::GatewayUnavailable, "model backend unavailable: " + last_failure);
}

}  // namespace grow
