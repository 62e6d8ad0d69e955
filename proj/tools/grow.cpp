// grow: run the coaching service, replay a stored write log, or plan
// check-ins for a goal.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <spdlog/spdlog.h>

#include "grow/conversation.hpp"
#include "grow/domain_json.hpp"
#include "grow/http_gateway.hpp"
#include "grow/profile_schema.hpp"
#include "grow/providers.hpp"
#include "grow/scheduler.hpp"
#include "grow/service.hpp"
#include "grow/store.hpp"

namespace {

using grow::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw grow::GrowError(grow::ErrorCode::ConfigError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw grow::GrowError(grow::ErrorCode::ConfigError, path + " is not valid JSON");
  return j;
}

grow::Timestamp wall_clock() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

// Relative paths in the config file resolve against the file's directory.
std::string resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).string();
}

int serve(const std::string& config_path, std::optional<int> port_override) {
  const json cfg = read_json(config_path);
  const auto base = std::filesystem::path(config_path).parent_path();

  grow::StoreOptions store_options;
  if (cfg.contains("snapshot")) {
    store_options.snapshot_path = resolve(base, cfg.at("snapshot").get<std::string>());
    const auto dir = store_options.snapshot_path->parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
  }
  store_options.transcript_retention = std::chrono::days{cfg.value("transcript_retention_days", 90)};
  grow::ProfileStore store(store_options);

  std::unique_ptr<grow::ModelGateway> gateway;
  const json backend = cfg.value("backend", json{{"kind", "scripted"}});
  if (backend.value("kind", "scripted") == "http") {
    gateway = std::make_unique<grow::HttpGateway>(grow::HttpGatewayConfig::from_env());
  } else {
    grow::Script script;
    if (backend.contains("script")) script = grow::load_script(resolve(base, backend.at("script").get<std::string>()));
    gateway = std::make_unique<grow::ScriptedGateway>(std::move(script));
  }
  std::unique_ptr<grow::ModelGateway> insights;
  if (cfg.contains("insights_script")) {
    insights = std::make_unique<grow::ScriptedGateway>(
        grow::load_script(resolve(base, cfg.at("insights_script").get<std::string>())));
  }
  grow::ModelGateway* insights_ptr = insights ? insights.get() : (backend.value("kind", "") == "http" ? gateway.get() : nullptr);

  grow::EngineConfig engine_config;
  engine_config.history_window = cfg.value("history_window", 20);
  if (cfg.contains("llm")) {
    const auto& llm = cfg.at("llm");
    engine_config.params.temperature = llm.value("temperature", engine_config.params.temperature);
    engine_config.params.max_tokens = llm.value("max_tokens", engine_config.params.max_tokens);
    engine_config.params.model_name = llm.value("model_name", engine_config.params.model_name);
  }
  if (cfg.contains("lexicon")) engine_config.lexicon = grow::load_lexicon(resolve(base, cfg.at("lexicon").get<std::string>()));
  if (cfg.contains("prompts")) engine_config.templates = grow::PromptTemplates::load(resolve(base, cfg.at("prompts").get<std::string>()));
  grow::ConversationEngine engine(store, *gateway, engine_config);

  grow::ServiceConfig service_config;
  if (cfg.contains("resources")) service_config.resources = grow::load_resources(resolve(base, cfg.at("resources").get<std::string>()));
  service_config.dashboard_url = cfg.value("dashboard_url", service_config.dashboard_url);
  const auto identity = grow::StaticTokenIdentity::from_json(cfg.value("identity", json{{"tokens", json::object()}}));
  grow::InMemoryCalendar calendar;
  grow::ApiService service(store, engine, calendar, insights_ptr, identity, service_config);

  grow::RecordingEmail email;
  grow::ReminderWorker worker(store, email, service_config.dashboard_url);
  worker.start(std::chrono::seconds{cfg.value("reminder_interval_seconds", 300)}, wall_clock);

  std::optional<std::filesystem::path> static_dir;
  if (cfg.contains("static_dir")) static_dir = resolve(base, cfg.at("static_dir").get<std::string>());
  const int port = port_override.value_or(cfg.value("port", 8080));
  const bool ok = grow::run_http_server(service, cfg.value("host", "127.0.0.1"), port, static_dir);
  worker.stop();
  return ok ? 0 : 1;
}

int replay(const std::string& snapshot, const std::string& user) {
  grow::StoreOptions options;
  grow::ProfileStore store(options);
  store.load(read_json(snapshot));
  int mismatches = 0;
  const auto users = user.empty() ? store.user_ids() : std::vector<std::string>{user};
  for (const auto& id : users) {
    const bool same = store.replay_write_log(id) == store.load_profile(id);
    std::cout << id << ": " << (same ? "replay matches" : "REPLAY DIFFERS") << " (" << store.write_log(id).size()
              << " log entries)\n";
    if (!same) ++mismatches;
  }
  return mismatches == 0 ? 0 : 1;
}

int schedule(const std::string& goal_path, const std::string& window, const std::string& busy_path, int offset) {
  // Either a stored goal or the shape the model uses to create one.
  const json doc = read_json(goal_path);
  grow::Goal goal;
  if (doc.contains("lastUpdated")) {
    goal = doc.get<grow::Goal>();
  } else {
    auto creates = grow::parse_goal_creates(json::array({doc}));
    goal = std::move(creates.front().goal);
    goal.goal_id = creates.front().goal_id.value_or("goal-1");
  }
  grow::TimeWindowPref pref;
  const auto w = grow::parse_enum<grow::TimeWindow>(window);
  if (!w) throw grow::GrowError(grow::ErrorCode::InvalidArgument, "unknown window " + window);
  pref.window = *w;
  std::vector<grow::BusyInterval> busy;
  if (!busy_path.empty()) {
    for (const auto& b : read_json(busy_path)) {
      busy.push_back({grow::parse_timestamp(b.at("start").get<std::string>()),
                      grow::parse_timestamp(b.at("end").get<std::string>())});
    }
  }
  grow::ScheduleOptions options;
  options.utc_offset = std::chrono::minutes{offset};
  const auto plan = grow::schedule_goal_checkins(goal, pref, busy, options);
  json out = {{"goal_too_short", plan.goal_too_short}, {"events", plan.events}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-coaching service"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> port;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("-c,--config", config_path, "Service configuration (JSON)")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("-p,--port", port, "Override the configured port");

  std::string snapshot, user;
  auto* replay_cmd = app.add_subcommand("replay", "Rebuild profiles from their write logs and compare");
  replay_cmd->add_option("snapshot", snapshot, "Store snapshot (JSON)")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("-u,--user", user, "Only this user id");

  std::string goal_path, window = "evening", busy_path;
  int offset = 0;
  auto* schedule_cmd = app.add_subcommand("schedule", "Plan midpoint and end check-ins for a goal");
  schedule_cmd->add_option("goal", goal_path, "Goal (JSON)")->required()->check(CLI::ExistingFile);
  schedule_cmd->add_option("-w,--window", window, "morning, afternoon, evening or night");
  schedule_cmd->add_option("-b,--busy", busy_path, "Busy intervals: [{start, end}, ...]")->check(CLI::ExistingFile);
  schedule_cmd->add_option("--utc-offset", offset, "Minutes ahead of UTC");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*serve_cmd) return serve(config_path, port);
    if (*replay_cmd) return replay(snapshot, user);
    if (*schedule_cmd) return schedule(goal_path, window, busy_path, offset);
  } catch (const grow::GrowError& e) {
    spdlog::error("{}: {}", grow::to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
