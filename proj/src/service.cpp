#include "grow/service.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "grow/domain_json.hpp"

namespace grow {
namespace {

constexpr std::string_view kRetryMessage = "The coach is unavailable right now. Your message was not lost, please try again.";

ApiResponse error_response(ErrorCode code, std::string_view message) {
  json body = {{"error", to_string(code)}, {"message", message}};
  if (code == ErrorCode::GatewayUnavailable || code == ErrorCode::ProviderProtocolError) {
    body["message"] = kRetryMessage;
    body["retry"] = true;
  }
  return {http_status_for(code), body};
}

ApiResponse error_response(const GrowError& e) { return error_response(e.code(), e.what()); }

void invalid(const std::string& message) { throw GrowError(ErrorCode::InvalidArgument, message); }

json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) invalid("request body is not valid JSON");
  if (!j.is_object()) invalid("request body must be a JSON object");
  return j;
}

std::optional<std::string> optional_name(const json& body) {
  if (!body.contains("display_name") || body.at("display_name").is_null()) return std::nullopt;
  const auto& v = body.at("display_name");
  if (!v.is_string()) invalid("display_name must be a string");
  std::string name = v.get<std::string>();
  if (name.size() > 64) invalid("display_name is too long");
  if (name.find_first_not_of(" \t") == std::string::npos) return std::nullopt;
  return name;
}

std::string hhmm(std::chrono::minutes m) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(m.count() / 60), static_cast<int>(m.count() % 60));
  return buf;
}

json engine_view(const EngineOutput& out, const SessionState& s) {
  json patches = json::array();
  for (const auto& p : out.applied_patches) {
    json sections = json::array();
    for (auto sec : p.sections) sections.push_back(to_string(sec));
    patches.push_back({{"sections", sections},
                       {"accepted", p.accepted},
                       {"error", p.error ? json(to_string(*p.error)) : json(nullptr)}});
  }
  return {{"reply_text", out.reply_text},
          {"phase", to_string(s.phase)},
          {"display_phase", display_label(s.phase)},
          {"transition", out.transition ? json(to_string(*out.transition)) : json(nullptr)},
          {"resource_footer_attached", out.resource_footer_attached},
          {"applied_patches", patches}};
}

std::string plan_key(const Goal& g, const UserSettings& s) {
  return format_date(g.timeframe.start_date) + "/" + std::to_string(g.timeframe.duration_days) + "/" +
         std::string(to_string(s.window.window)) + "/" + std::to_string(s.utc_offset.count());
}

}  // namespace

// ---------------------------------------------------------------------------

StaticTokenIdentity StaticTokenIdentity::from_json(const json& j) {
  std::map<std::string, std::string> tokens;
  try {
    for (const auto& [token, user] : j.at("tokens").items()) tokens.emplace(token, user.get<std::string>());
  } catch (const json::exception& e) {
    throw GrowError(ErrorCode::ConfigError, std::string("identity tokens: ") + e.what());
  }
  return StaticTokenIdentity(std::move(tokens));
}

std::optional<std::string> StaticTokenIdentity::resolve(std::string_view token) const {
  auto it = tokens_.find(token);
  if (it == tokens_.end()) return std::nullopt;
  return it->second;
}

std::vector<SupportResource> default_crisis_resources() {
  return {
      {"988 Suicide & Crisis Lifeline", "Call or text 988 in the US, any time, for free and confidential support.",
       "https://988lifeline.org", ResourceCategory::Crisis},
      {"Crisis Text Line", "Text HOME to 741741 to reach a trained crisis counselor.",
       "https://www.crisistextline.org", ResourceCategory::Crisis},
      {"Find a Helpline", "Free, confidential helplines in countries around the world.", "https://findahelpline.com",
       ResourceCategory::Crisis},
  };
}

std::vector<SupportResource> ensure_crisis_entries(std::vector<SupportResource> resources) {
  const bool has_crisis = std::any_of(resources.begin(), resources.end(),
                                      [](const SupportResource& r) { return r.category == ResourceCategory::Crisis; });
  if (!has_crisis) {
    auto crisis = default_crisis_resources();
    resources.insert(resources.begin(), crisis.begin(), crisis.end());
  }
  return resources;
}

std::vector<SupportResource> parse_resources(const json& j) {
  if (!j.is_array()) throw GrowError(ErrorCode::ConfigError, "resource catalog must be a list");
  std::vector<SupportResource> out;
  for (const auto& item : j) {
    try {
      SupportResource r;
      r.title = item.at("title").get<std::string>();
      r.description = item.at("description").get<std::string>();
      r.url = item.at("url").get<std::string>();
      const auto category = parse_enum<ResourceCategory>(item.at("category").get<std::string>());
      if (!category) throw GrowError(ErrorCode::ConfigError, "unknown resource category in " + r.title);
      r.category = *category;
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw GrowError(ErrorCode::ConfigError, std::string("resource catalog: ") + e.what());
    }
  }
  return out;
}

std::vector<SupportResource> load_resources(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GrowError(ErrorCode::ConfigError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw GrowError(ErrorCode::ConfigError, path.string() + " is not valid JSON");
  return parse_resources(j);
}

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UserNotFound:
      return 404;
    case ErrorCode::GatewayUnavailable:
    case ErrorCode::ProviderProtocolError:
    case ErrorCode::StorageUnavailable:
      return 503;
    case ErrorCode::IllegalTransition:
      return 409;
    case ErrorCode::ConfigError:
    case ErrorCode::ScriptFormatError:
    case ErrorCode::DuplicateScriptEntry:
      return 500;
    default:
      return 422;
  }
}

// ---------------------------------------------------------------------------

ApiService::ApiService(ProfileStore& store, ConversationEngine& engine, CalendarProvider& calendar,
                       ModelGateway* insights, const IdentityProvider& identity, ServiceConfig config)
    : store_(store),
      engine_(engine),
      calendar_(calendar),
      insights_(insights),
      identity_(identity),
      config_(std::move(config)) {
  config_.resources = ensure_crisis_entries(std::move(config_.resources));
}

Timestamp ApiService::now() const {
  if (config_.clock) return config_.clock();
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

ApiResponse ApiService::handle(const ApiRequest& request) {
  const std::string path = request.path.substr(0, request.path.find('?'));
  static const std::map<std::string, std::set<std::string>> kRoutes = {
      {"/api/session", {"POST"}},          {"/api/chat", {"POST"}},  {"/api/dashboard", {"GET"}},
      {"/api/settings", {"GET", "PUT"}},   {"/api/calendar/connect", {"POST"}},
      {"/api/resources", {"GET"}},         {"/api/user", {"DELETE"}},
  };
  auto route = kRoutes.find(path);
  if (route == kRoutes.end()) return {404, {{"error", "NotFound"}, {"message", "no such route"}}};
  if (!route->second.contains(request.method)) {
    return {405, {{"error", "MethodNotAllowed"}, {"message", request.method + " is not supported on " + path}}};
  }
  // The resource list stays reachable without a session.
  if (path == "/api/resources") return get_resources();

  constexpr std::string_view kBearer = "Bearer ";
  std::optional<std::string> user_id;
  if (std::string_view(request.authorization).substr(0, kBearer.size()) == kBearer) {
    user_id = identity_.resolve(std::string_view(request.authorization).substr(kBearer.size()));
  }
  if (!user_id) return {401, {{"error", "Unauthenticated"}, {"message", "a valid bearer token is required"}}};

  try {
    const json body = parse_body(request.body);
    if (path == "/api/session") return post_session(*user_id, body);
    if (path == "/api/chat") return post_chat(*user_id, body);
    if (path == "/api/dashboard") return get_dashboard(*user_id);
    if (path == "/api/settings") return request.method == "GET" ? get_settings(*user_id) : put_settings(*user_id, body);
    if (path == "/api/calendar/connect") return post_calendar_connect(*user_id, body);
    if (path == "/api/user") return delete_user(*user_id);
  } catch (const GrowError& e) {
    if (http_status_for(e.code()) >= 500) spdlog::error("{} {}: {}", request.method, path, e.what());
    return error_response(e);
  } catch (const std::exception& e) {
    spdlog::error("{} {}: {}", request.method, path, e.what());
    return {500, {{"error", "Internal"}, {"message", "internal error"}}};
  }
  return {404, {{"error", "NotFound"}, {"message", "no such route"}}};
}

ApiResponse ApiService::post_session(const std::string& user_id, const json& body) {
  const auto name = optional_name(body);
  store_.register_user(user_id);
  sessions_.drop(user_id);
  return sessions_.with_session(
      user_id, [&] { return engine_.start_session(user_id, name); },
      [&](SessionState& s) -> ApiResponse {
        EngineOutput out = engine_.greet(s);
        json view = engine_view(out, s);
        view["persona"] = store_.settings(user_id).persona;
        return {200, view};
      });
}

ApiResponse ApiService::post_chat(const std::string& user_id, const json& body) {
  if (!body.contains("text") || !body.at("text").is_string()) invalid("text is required");
  const std::string text = body.at("text").get<std::string>();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) invalid("text is empty");
  if (text.size() > 4000) invalid("text is too long");
  const auto name = optional_name(body);
  if (!store_.has_user(user_id)) throw GrowError(ErrorCode::UserNotFound, "start a session first");

  ApiResponse response = sessions_.with_session(
      user_id, [&] { return engine_.start_session(user_id, name); },
      [&](SessionState& s) -> ApiResponse {
        if (name && !s.display_name) {
          s.display_name = name;
          store_.rescrub_transcript(user_id, *name);
        }
        EngineOutput out = engine_.advance(s, text);
        return {200, engine_view(out, s)};
      });
  try {
    reconcile_calendar(user_id);
  } catch (const GrowError& e) {
    spdlog::warn("calendar update for {} failed: {}", user_id, e.what());
  }
  return response;
}

ApiResponse ApiService::get_dashboard(const std::string& user_id) {
  const UserProfile profile = store_.load_profile(user_id);
  const UserSettings settings = store_.settings(user_id);
  const Timestamp t = now();
  const Date today = local_date(t, settings.utc_offset);

  Phase phase = resume_phase(profile);
  if (sessions_.has_session(user_id)) {
    phase = sessions_.with_session(
        user_id, [&] { return engine_.start_session(user_id); }, [](SessionState& s) { return s.phase; });
  }

  const auto transcript = store_.transcript(user_id);
  std::vector<Timestamp> checkins;
  std::vector<std::string> user_messages;
  std::vector<ChatTurn> turns;
  for (const auto& st : transcript) {
    turns.push_back(st.turn);
    if (st.turn.speaker == Speaker::User) {
      checkins.push_back(st.turn.timestamp);
      user_messages.push_back(st.turn.text);
    }
  }

  ThemeCache cache = store_.themes(user_id);
  bool stale = false;
  if (!user_messages.empty() && cache.computed_on != today) {
    std::lock_guard lock(insights_mutex_);
    const auto& templates = engine_.config().templates;
    if (insights_) {
      constexpr std::size_t kThemeTurns = 60;
      std::span<const ChatTurn> recent(turns);
      if (recent.size() > kThemeTurns) recent = recent.subspan(recent.size() - kThemeTurns);
      ThemeResult themes =
          summarize_themes(recent, *insights_, templates.themes, cache.themes, cache.computed_on, today);
      stale = themes.stale;
      if (themes.recomputed) cache = {themes.themes, today};
    } else {
      cache.computed_on = today;
    }
    if (!stale) {
      const StyleResult style = classify_style(user_messages, insights_, templates.style_classifier);
      store_.set_communication_style(user_id, style.style, t);
      store_.put_themes(user_id, cache);
    }
  }

  const UserProfile fresh = store_.load_profile(user_id);
  std::vector<CheckinEvent> events;
  for (const auto& e : store_.events(user_id)) events.push_back(e.event);

  DashboardInputs in;
  in.phase = phase;
  in.profile = &fresh;
  in.events = events;
  in.checkins = checkins;
  in.today = today;
  in.utc_offset = settings.utc_offset;
  in.themes = cache.themes;
  in.themes_stale = stale;
  in.resources = config_.resources;
  return {200, build_dashboard(in)};
}

json ApiService::settings_view(const UserSettings& s) const {
  json bounds = json::object();
  for (std::size_t i = 0; i < s.window.table.bounds.size(); ++i) {
    const auto& b = s.window.table.bounds[i];
    bounds[std::string(to_string(static_cast<TimeWindow>(i)))] = {{"start", hhmm(b.begin)}, {"end", hhmm(b.end)}};
  }
  const auto next = next_reminder(s.reminders, now());
  return {{"frequency", to_string(s.reminders.frequency)},
          {"reminders_enabled", s.reminders.enabled},
          {"last_reminder_sent", s.reminders.last_sent ? json(format_timestamp(*s.reminders.last_sent)) : json(nullptr)},
          {"next_reminder", next ? json(format_timestamp(*next)) : json(nullptr)},
          {"window", to_string(s.window.window)},
          {"window_bounds", bounds},
          {"persona", s.persona},
          {"utc_offset_minutes", s.utc_offset.count()},
          {"calendar_connected", s.calendar_connected}};
}

ApiResponse ApiService::get_settings(const std::string& user_id) {
  return {200, settings_view(store_.settings(user_id))};
}

ApiResponse ApiService::put_settings(const std::string& user_id, const json& body) {
  UserSettings s = store_.settings(user_id);
  const UserSettings before = s;
  for (const auto& [key, value] : body.items()) {
    if (key == "frequency") {
      const auto f = value.is_string() ? parse_enum<ReminderFrequency>(value.get<std::string>()) : std::nullopt;
      if (!f) invalid("frequency must be one of daily, biweekly, weekly");
      s.reminders.frequency = *f;
    } else if (key == "reminders_enabled") {
      if (!value.is_boolean()) invalid("reminders_enabled must be true or false");
      s.reminders.enabled = value.get<bool>();
    } else if (key == "window") {
      const auto w = value.is_string() ? parse_enum<TimeWindow>(value.get<std::string>()) : std::nullopt;
      if (!w) invalid("window must be one of morning, afternoon, evening, night");
      s.window.window = *w;
    } else if (key == "utc_offset_minutes") {
      if (!value.is_number_integer()) invalid("utc_offset_minutes must be an integer");
      const auto m = value.get<long long>();
      if (m < -720 || m > 840) invalid("utc_offset_minutes must be within -720..840");
      s.utc_offset = std::chrono::minutes{m};
    } else if (key == "persona") {
      if (!value.is_object()) invalid("persona must be an object");
      for (const auto& [pk, pv] : value.items()) {
        if (pk == "name" || pk == "avatar") {
          if (!pv.is_string() || pv.get<std::string>().empty() || pv.get<std::string>().size() > 40) {
            invalid("persona." + pk + " must be a non-empty string of at most 40 characters");
          }
          (pk == "name" ? s.persona.name : s.persona.avatar) = pv.get<std::string>();
        } else if (pk == "gender") {
          const auto g = pv.is_string() ? parse_enum<CoachGender>(pv.get<std::string>()) : std::nullopt;
          if (!g) invalid("persona.gender must be one of unspecified, female, male, non-binary");
          s.persona.gender = *g;
        } else {
          invalid("unknown persona field '" + pk + "'");
        }
      }
    } else {
      invalid("unknown or read-only settings field '" + key + "'");
    }
  }
  if (s.reminders.enabled && !before.reminders.enabled) s.reminders.enabled_at = now();
  store_.put_settings(user_id, s);
  if (s.window != before.window || s.utc_offset != before.utc_offset) {
    try {
      reconcile_calendar(user_id);
    } catch (const GrowError& e) {
      spdlog::warn("calendar update for {} failed: {}", user_id, e.what());
    }
  }
  return {200, settings_view(s)};
}

ApiResponse ApiService::post_calendar_connect(const std::string& user_id, const json& body) {
  if (!body.contains("authorization_code") || !body.at("authorization_code").is_string()) {
    invalid("authorization_code is required");
  }
  store_.load_profile(user_id);
  calendar_.connect(user_id, body.at("authorization_code").get<std::string>());
  UserSettings s = store_.settings(user_id);
  s.calendar_connected = true;
  store_.put_settings(user_id, s);
  const std::size_t created = reconcile_calendar(user_id);
  return {200, {{"calendar_connected", true}, {"events_scheduled", created}}};
}

ApiResponse ApiService::get_resources() { return {200, config_.resources}; }

ApiResponse ApiService::delete_user(const std::string& user_id) {
  const auto events = store_.delete_user_data(user_id);
  sessions_.drop(user_id);
  std::size_t removed = 0;
  for (const auto& e : events) {
    try {
      calendar_.delete_event(user_id, e.provider_event_id);
      ++removed;
    } catch (const std::exception& ex) {
      spdlog::warn("could not delete calendar event for {}: {}", user_id, ex.what());
    }
  }
  return {200, {{"deleted", true}, {"calendar_events_removed", removed}}};
}

std::size_t ApiService::reconcile_calendar(const std::string& user_id) {
  const UserSettings settings = store_.settings(user_id);
  if (!settings.calendar_connected) return 0;
  const UserProfile profile = store_.load_profile(user_id);
  const auto stored = store_.events(user_id);
  const Timestamp t = now();
  std::size_t created = 0;

  for (const auto& goal : profile.mental_health_goals) {
    std::vector<ScheduledEvent> existing, future, past;
    for (const auto& e : stored) {
      if (e.event.goal_id != goal.goal_id) continue;
      existing.push_back(e);
      (e.event.start > t ? future : past).push_back(e);
    }
    if (goal.status == GoalStatus::Completed) {
      if (future.empty()) continue;
      for (const auto& e : future) calendar_.delete_event(user_id, e.provider_event_id);
      store_.replace_goal_events(user_id, goal.goal_id, past);
      continue;
    }
    const std::string key = plan_key(goal, settings);
    const bool current = !existing.empty() && std::all_of(existing.begin(), existing.end(), [&](const ScheduledEvent& e) {
                           return e.plan_key == key;
                         });
    if (current) continue;

    for (const auto& e : future) calendar_.delete_event(user_id, e.provider_event_id);
    const Timestamp from = Timestamp{goal.timeframe.start_date} - settings.utc_offset - std::chrono::days{1};
    const Timestamp to = Timestamp{goal.timeframe.start_date} - settings.utc_offset +
                         std::chrono::days{goal.timeframe.duration_days + config_.max_shift_days + 1};
    const auto busy = calendar_.free_busy(user_id, from, to);
    ScheduleOptions options{settings.utc_offset, config_.dashboard_url, config_.max_shift_days};
    const CheckinPlan plan = schedule_goal_checkins(goal, settings.window, busy, options);
    std::vector<ScheduledEvent> fresh;
    for (const auto& e : plan.events) {
      fresh.push_back({e, calendar_.create_event(user_id, e), key});
      ++created;
    }
    store_.replace_goal_events(user_id, goal.goal_id, std::move(fresh));
  }
  return created;
}

// ---------------------------------------------------------------------------

ReminderWorker::ReminderWorker(ProfileStore& store, EmailProvider& email, std::string dashboard_url)
    : store_(store), email_(email), dashboard_url_(std::move(dashboard_url)) {}

ReminderWorker::~ReminderWorker() { stop(); }

std::vector<std::string> ReminderWorker::run_once(Timestamp now) {
  const auto settings = store_.reminder_settings();
  std::vector<std::string> sent;
  for (const auto& user_id : due_reminders(settings, now)) {
    UserProfile profile;
    try {
      profile = store_.load_profile(user_id);
    } catch (const GrowError&) {
      continue;
    }
    std::string body = "Hi! This is your coaching reminder.\n";
    bool any = false;
    for (const auto& g : profile.mental_health_goals) {
      if (g.status != GoalStatus::Active) continue;
      if (!any) body += "\nWhere your goals stand:\n";
      any = true;
      body += "- " + g.description + ": " + std::to_string(g.progress) + "%\n";
    }
    if (!any) body += "\nWhenever you are ready, your coach can help you set a small goal.\n";
    body += "\nCheck in with your coach: " + dashboard_url_ + "\n";
    try {
      email_.send(user_id, "Time for a quick check-in", body);
      store_.mark_reminder_sent(user_id, now);
      sent.push_back(user_id);
    } catch (const std::exception& e) {
      spdlog::warn("reminder for {} not sent: {}", user_id, e.what());
    }
  }
  const auto purged = store_.purge_expired_transcripts(now);
  if (purged) spdlog::info("purged {} expired transcript turns", purged);
  return sent;
}

void ReminderWorker::start(std::chrono::seconds interval, std::function<Timestamp()> clock) {
  stop();
  stopping_ = false;
  thread_ = std::thread([this, interval, clock = std::move(clock)] {
    std::unique_lock lock(mutex_);
    while (!stopping_) {
      lock.unlock();
      try {
        run_once(clock());
      } catch (const std::exception& e) {
        spdlog::error("reminder scan failed: {}", e.what());
      }
      lock.lock();
      cv_.wait_for(lock, interval, [this] { return stopping_; });
    }
  });
}

void ReminderWorker::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

}  // namespace grow
