#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <string>

#include "grow/gateway.hpp"

namespace grow {

struct HttpGatewayConfig {
  // Full chat-completions URL, e.g. https://api.openai.com/v1/chat/completions
  std::string endpoint;
  std::string api_key;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{60};

  // GROW_LLM_ENDPOINT, GROW_LLM_API_KEY. Throws GrowError(ConfigError) when
  // the endpoint is missing.
  static HttpGatewayConfig from_env();
};

// Extracts text and saveProfile calls from a chat-completions response body.
// Tool calls whose argument string is not a complete JSON object are dropped.
// Throws GrowError(ProviderProtocolError) on a structurally invalid body.
LlmResult parse_chat_completion(const json& body);

// Live backend. Retries connection failures, 429 and 5xx with exponential
// backoff; other statuses are protocol errors.
class HttpGateway : public ModelGateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpGateway(HttpGatewayConfig config, Sleeper sleeper = {});

  LlmResult complete(const PromptBundle& bundle, const LlmParams& params) override;

  std::size_t attempts_made() const noexcept { return attempts_.load(); }

 private:
  HttpGatewayConfig config_;
  Sleeper sleeper_;
  std::string host_;  // scheme://host[:port]
  std::string path_;
  std::atomic<std::size_t> attempts_{0};
};

}  // namespace grow
