#pragma once

// The HTTP API, kept independent of any server library: a request goes in,
// a status and JSON body come out.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "grow/conversation.hpp"
#include "grow/metrics.hpp"
#include "grow/providers.hpp"
#include "grow/store.hpp"

namespace grow {

using json = nlohmann::json;

class IdentityProvider {
 public:
  virtual ~IdentityProvider() = default;
  // Opaque user id for a bearer token, or nullopt.
  virtual std::optional<std::string> resolve(std::string_view token) const = 0;
};

class StaticTokenIdentity : public IdentityProvider {
 public:
  explicit StaticTokenIdentity(std::map<std::string, std::string> token_to_user)
      : tokens_(token_to_user.begin(), token_to_user.end()) {}
  // {"tokens": {"<token>": "<user id>", ...}}
  static StaticTokenIdentity from_json(const json& j);
  std::optional<std::string> resolve(std::string_view token) const override;

 private:
  std::map<std::string, std::string, std::less<>> tokens_;
};

// Catalog file: a JSON list of {title, description, url, category}. Throws
// ConfigError when the file is unreadable or malformed.
std::vector<SupportResource> parse_resources(const json& j);
std::vector<SupportResource> load_resources(const std::filesystem::path& path);
// Crisis entries shipped with the service, added when a catalog has none.
std::vector<SupportResource> default_crisis_resources();
std::vector<SupportResource> ensure_crisis_entries(std::vector<SupportResource> resources);

struct ApiRequest {
  std::string method;
  std::string path;
  // Value of the Authorization header.
  std::string authorization;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  json body;
};

int http_status_for(ErrorCode code) noexcept;

struct ServiceConfig {
  std::vector<SupportResource> resources = default_crisis_resources();
  std::string dashboard_url = "http://localhost:8080/#/dashboard";
  int max_shift_days = 2;
  std::function<Timestamp()> clock;
};

class ApiService {
 public:
  // |insights| backs themes and style; may be null (themes stay empty and
  // style uses the fallback thresholds).
  ApiService(ProfileStore& store, ConversationEngine& engine, CalendarProvider& calendar,
             ModelGateway* insights, const IdentityProvider& identity, ServiceConfig config = {});

  ApiResponse handle(const ApiRequest& request);

  // Brings stored calendar events in line with the user's goals: schedules
  // new or changed goals, removes future events of completed ones. Returns
  // the number of events created.
  std::size_t reconcile_calendar(const std::string& user_id);

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  Timestamp now() const;

  ApiResponse post_session(const std::string& user_id, const json& body);
  ApiResponse post_chat(const std::string& user_id, const json& body);
  ApiResponse get_dashboard(const std::string& user_id);
  ApiResponse get_settings(const std::string& user_id);
  ApiResponse put_settings(const std::string& user_id, const json& body);
  ApiResponse post_calendar_connect(const std::string& user_id, const json& body);
  ApiResponse get_resources();
  ApiResponse delete_user(const std::string& user_id);

  json settings_view(const UserSettings& s) const;

  ProfileStore& store_;
  ConversationEngine& engine_;
  CalendarProvider& calendar_;
  ModelGateway* insights_;
  const IdentityProvider& identity_;
  ServiceConfig config_;
  SessionRegistry sessions_;
  std::mutex insights_mutex_;
};

// ---------------------------------------------------------------------------

// Sends due reminder emails and purges expired transcripts.
class ReminderWorker {
 public:
  ReminderWorker(ProfileStore& store, EmailProvider& email, std::string dashboard_url);
  ~ReminderWorker();

  // One scan. Returns the users emailed.
  std::vector<std::string> run_once(Timestamp now);

  void start(std::chrono::seconds interval, std::function<Timestamp()> clock);
  void stop();

 private:
  ProfileStore& store_;
  EmailProvider& email_;
  std::string dashboard_url_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::thread thread_;
};

// Serves /api/* from |service| and, when given, static files from
// |static_dir|. Blocks until the server stops.
bool run_http_server(ApiService& service, const std::string& host, int port,
                     const std::optional<std::filesystem::path>& static_dir);

}  // namespace grow
