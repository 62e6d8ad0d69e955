#include "grow/store.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "grow/domain_json.hpp"
#include "grow/error.hpp"
#include "grow/pii.hpp"

namespace grow {
namespace {

constexpr std::string_view kFreeTextKeys[] = {"college_year", "major", "description", "value_statement"};
constexpr std::string_view kFreeTextListKeys[] = {"steps", "obstacles"};

bool is_free_text_key(std::string_view key) {
  return std::find(std::begin(kFreeTextKeys), std::end(kFreeTextKeys), key) != std::end(kFreeTextKeys);
}

bool is_free_text_list_key(std::string_view key) {
  return std::find(std::begin(kFreeTextListKeys), std::end(kFreeTextListKeys), key) !=
         std::end(kFreeTextListKeys);
}

void scrub_free_text(json& j, std::optional<std::string_view> name) {
  if (j.is_array()) {
    for (auto& item : j) scrub_free_text(item, name);
    return;
  }
  if (!j.is_object()) return;
  for (auto& [key, value] : j.items()) {
    if (value.is_string() && is_free_text_key(key)) {
      value = scrub_pii(value.get<std::string>(), name);
    } else if (value.is_array() && is_free_text_list_key(key)) {
      for (auto& item : value) {
        if (item.is_string()) item = scrub_pii(item.get<std::string>(), name);
      }
    } else {
      scrub_free_text(value, name);
    }
  }
}

struct Applied {
  SaveResult result;
  std::vector<ToolCallPatch> sanitized;
};

std::string next_goal_id(const UserProfile& profile, std::set<std::string>& taken) {
  for (std::size_t n = profile.mental_health_goals.size() + 1;; ++n) {
    std::string id = "goal-" + std::to_string(n);
    if (!find_goal(profile, id) && !taken.contains(id)) return id;
  }
}

// The whole write protocol. Pure: |current| is not modified.
Applied apply_patches(const UserProfile& current, std::span<const ToolCallPatch> patches, Timestamp now,
                      std::optional<std::string_view> session_name) {
  if (patches.empty()) throw GrowError(ErrorCode::SchemaViolation, "saveProfile: no sections given");
  const Phase phase = patches.front().phase_tag;
  for (const auto& p : patches) {
    if (p.phase_tag != phase) {
      throw GrowError(ErrorCode::SchemaViolation, "saveProfile: patches carry different phase tags");
    }
  }
  for (const auto& p : patches) {
    if (!is_section_permitted(phase, p.section)) {
      throw GrowError(ErrorCode::WriteOutOfPhase, std::string(to_string(p.section)) +
                                                      " may not be written during " +
                                                      std::string(to_string(phase)));
    }
  }

  if (phase == Phase::Introduction && current.intro_complete) {
    throw GrowError(ErrorCode::DuplicateWrite, "introduction already saved");
  }
  if (phase == Phase::ValuesCheckIn && current.bevs && current.bevs->done()) {
    throw GrowError(ErrorCode::DuplicateWrite, "values check-in already saved");
  }

  Applied out;
  std::optional<std::string> payload_name;
  for (const auto& p : patches) {
    ToolCallPatch clean = p;
    if (p.section == Section::Demographic && clean.payload.is_object() && clean.payload.contains("name")) {
      if (clean.payload.at("name").is_string()) payload_name = clean.payload.at("name").get<std::string>();
      clean.payload.erase("name");
    }
    out.sanitized.push_back(std::move(clean));
  }
  const std::optional<std::string_view> name =
      session_name ? session_name : (payload_name ? std::optional<std::string_view>(*payload_name) : std::nullopt);
  for (auto& p : out.sanitized) scrub_free_text(p.payload, name);

  UserProfile next = current;
  SaveResult& result = out.result;
  switch (phase) {
    case Phase::Introduction: {
      IntroductionWrite intro = parse_introduction(out.sanitized);
      next.demographic = intro.demographic;
      next.personality_traits = intro.traits;
      next.mental_health_profile = intro.mental_health;
      next.intro_complete = true;
      result.display_name = payload_name;
      break;
    }
    case Phase::ValuesCheckIn:
      next.bevs = parse_bevs_save(out.sanitized.front().payload);
      break;
    case Phase::GoalSetting: {
      std::set<std::string> taken;
      for (auto& create : parse_goal_creates(out.sanitized.front().payload)) {
        if (create.goal_id && (find_goal(next, *create.goal_id) || taken.contains(*create.goal_id))) {
          throw GrowError(ErrorCode::DuplicateWrite, "goal " + *create.goal_id + " already exists");
        }
        Goal goal = std::move(create.goal);
        goal.goal_id = create.goal_id ? *create.goal_id : next_goal_id(next, taken);
        goal.last_updated = now;
        taken.insert(goal.goal_id);
        result.created_goals.push_back(goal.goal_id);
        next.mental_health_goals.push_back(std::move(goal));
      }
      break;
    }
    case Phase::ActiveCoaching:
      for (const auto& update : parse_goal_updates(out.sanitized.front().payload)) {
        auto it = std::find_if(next.mental_health_goals.begin(), next.mental_health_goals.end(),
                               [&](const Goal& g) { return g.goal_id == update.goal_id; });
        if (it == next.mental_health_goals.end()) {
          throw GrowError(ErrorCode::UnknownGoal, "no goal with id " + update.goal_id);
        }
        const bool was_completed = it->status == GoalStatus::Completed;
        if (apply_goal_update(*it, update, now)) {
          result.updated_goals.push_back(it->goal_id);
          if (!was_completed && it->status == GoalStatus::Completed) {
            result.completed_goals.push_back(it->goal_id);
          }
        }
      }
      break;
  }

  result.changed = next != current;
  result.profile = std::move(next);
  return out;
}

json turn_to_json(const StoredTurn& t) {
  return {{"id", t.id},
          {"speaker", to_string(t.turn.speaker)},
          {"text", t.turn.text},
          {"timestamp", format_timestamp(t.turn.timestamp)}};
}

StoredTurn turn_from_json(const json& j) {
  StoredTurn t;
  t.id = j.at("id").get<std::uint64_t>();
  t.turn.speaker = parse_enum<Speaker>(j.at("speaker").get<std::string>()).value_or(Speaker::User);
  t.turn.text = j.at("text").get<std::string>();
  t.turn.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
  return t;
}

std::optional<Timestamp> opt_time(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return parse_timestamp(j.at(key).get<std::string>());
}

json opt_time_json(const std::optional<Timestamp>& t) {
  return t ? json(format_timestamp(*t)) : json(nullptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// JSON forms

void to_json(json& j, const ReminderSettings& r) {
  j = json{{"frequency", to_string(r.frequency)},
           {"enabled", r.enabled},
           {"last_sent", opt_time_json(r.last_sent)},
           {"enabled_at", opt_time_json(r.enabled_at)}};
}

void from_json(const json& j, ReminderSettings& r) {
  r.frequency = parse_enum<ReminderFrequency>(j.at("frequency").get<std::string>()).value_or(ReminderFrequency::Weekly);
  r.enabled = j.at("enabled").get<bool>();
  r.last_sent = opt_time(j, "last_sent");
  r.enabled_at = opt_time(j, "enabled_at");
}

void to_json(json& j, const CoachPersona& p) {
  j = json{{"name", p.name}, {"avatar", p.avatar}, {"gender", to_string(p.gender)}};
}

void from_json(const json& j, CoachPersona& p) {
  p.name = j.at("name").get<std::string>();
  p.avatar = j.at("avatar").get<std::string>();
  p.gender = parse_enum<CoachGender>(j.at("gender").get<std::string>()).value_or(CoachGender::Unspecified);
}

void to_json(json& j, const UserSettings& s) {
  json bounds = json::object();
  for (std::size_t i = 0; i < s.window.table.bounds.size(); ++i) {
    const auto& b = s.window.table.bounds[i];
    bounds[std::string(to_string(static_cast<TimeWindow>(i)))] = {b.begin.count(), b.end.count()};
  }
  j = json{{"reminders", s.reminders},
           {"window", to_string(s.window.window)},
           {"window_bounds_minutes", bounds},
           {"persona", s.persona},
           {"utc_offset_minutes", s.utc_offset.count()},
           {"calendar_connected", s.calendar_connected}};
}

void from_json(const json& j, UserSettings& s) {
  s.reminders = j.at("reminders").get<ReminderSettings>();
  s.window.window = parse_enum<TimeWindow>(j.at("window").get<std::string>()).value_or(TimeWindow::Evening);
  if (j.contains("window_bounds_minutes")) {
    for (std::size_t i = 0; i < s.window.table.bounds.size(); ++i) {
      const auto key = std::string(to_string(static_cast<TimeWindow>(i)));
      const auto& b = j.at("window_bounds_minutes").at(key);
      s.window.table.bounds[i] = {std::chrono::minutes{b.at(0).get<int>()}, std::chrono::minutes{b.at(1).get<int>()}};
    }
  }
  s.persona = j.at("persona").get<CoachPersona>();
  s.utc_offset = std::chrono::minutes{j.at("utc_offset_minutes").get<int>()};
  s.calendar_connected = j.at("calendar_connected").get<bool>();
}

void to_json(json& j, const CheckinEvent& e) {
  j = json{{"goal_id", e.goal_id},
           {"kind", to_string(e.kind)},
           {"start", format_timestamp(e.start)},
           {"duration_minutes", e.duration.count()},
           {"link", e.link},
           {"fallback", e.fallback},
           {"title", e.title},
           {"description", e.description}};
}

void from_json(const json& j, CheckinEvent& e) {
  e.goal_id = j.at("goal_id").get<std::string>();
  e.kind = parse_enum<CheckinKind>(j.at("kind").get<std::string>()).value_or(CheckinKind::End);
  e.start = parse_timestamp(j.at("start").get<std::string>());
  e.duration = std::chrono::minutes{j.at("duration_minutes").get<int>()};
  e.link = j.at("link").get<std::string>();
  e.fallback = j.at("fallback").get<bool>();
  e.title = j.at("title").get<std::string>();
  e.description = j.at("description").get<std::string>();
}

// ---------------------------------------------------------------------------

ProfileStore::ProfileStore(StoreOptions options) : options_(std::move(options)) {
  if (options_.snapshot_path && std::filesystem::exists(*options_.snapshot_path)) {
    std::ifstream in(*options_.snapshot_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    json snapshot = json::parse(buf.str(), nullptr, false);
    if (snapshot.is_discarded()) {
      throw GrowError(ErrorCode::StorageUnavailable, "corrupt snapshot " + options_.snapshot_path->string());
    }
    load(snapshot);
  }
}

ProfileStore::UserRecord& ProfileStore::record(const std::string& user_id) {
  auto it = users_.find(user_id);
  if (it == users_.end()) throw GrowError(ErrorCode::UserNotFound, "unknown user");
  return it->second;
}

const ProfileStore::UserRecord& ProfileStore::record(const std::string& user_id) const {
  auto it = users_.find(user_id);
  if (it == users_.end()) throw GrowError(ErrorCode::UserNotFound, "unknown user");
  return it->second;
}

// Runs |fn| on the user's record under the write lock and writes the
// snapshot through; on a failed write the record is rolled back.
template <typename Fn>
auto ProfileStore::mutate(const std::string& user_id, Fn&& fn) {
  std::unique_lock lock(mutex_);
  UserRecord& rec = record(user_id);
  UserRecord backup = rec;
  auto result = fn(rec);
  try {
    persist_locked();
  } catch (...) {
    rec = std::move(backup);
    throw;
  }
  return result;
}

void ProfileStore::persist_locked() const {
  if (!options_.snapshot_path) return;
  const auto& path = *options_.snapshot_path;
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << dump_locked().dump(2);
    if (!out) throw GrowError(ErrorCode::StorageUnavailable, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw GrowError(ErrorCode::StorageUnavailable, "cannot replace " + path.string());
}

UserProfile ProfileStore::register_user(const std::string& user_id) {
  if (user_id.empty()) throw GrowError(ErrorCode::InvalidArgument, "empty user id");
  std::unique_lock lock(mutex_);
  auto [it, inserted] = users_.try_emplace(user_id);
  if (inserted) {
    it->second.profile.user_id = user_id;
    try {
      persist_locked();
    } catch (...) {
      users_.erase(it);
      throw;
    }
  }
  return it->second.profile;
}

bool ProfileStore::has_user(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  return users_.contains(user_id);
}

UserProfile ProfileStore::load_profile(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  return record(user_id).profile;
}

std::vector<std::string> ProfileStore::user_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : users_) ids.push_back(id);
  return ids;
}

SaveResult ProfileStore::save_profile(const std::string& user_id, std::span<const ToolCallPatch> patches,
                                      Timestamp now, std::optional<std::string_view> display_name) {
  return mutate(user_id, [&](UserRecord& rec) {
    Applied applied = apply_patches(rec.profile, patches, now, display_name);
    if (applied.result.changed) {
      rec.profile = applied.result.profile;
      rec.log.push_back({now, std::move(applied.sanitized), std::nullopt});
    }
    return std::move(applied.result);
  });
}

SaveResult ProfileStore::save_profile(const std::string& user_id, const ToolCallPatch& patch, Timestamp now,
                                      std::optional<std::string_view> display_name) {
  return save_profile(user_id, std::span<const ToolCallPatch>(&patch, 1), now, display_name);
}

void ProfileStore::set_communication_style(const std::string& user_id, const CommunicationStyle& style,
                                           Timestamp now) {
  mutate(user_id, [&](UserRecord& rec) {
    if (rec.profile.communication_style != style) {
      rec.profile.communication_style = style;
      rec.log.push_back({now, {}, style});
    }
    return 0;
  });
}

std::vector<WriteLogEntry> ProfileStore::write_log(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  return record(user_id).log;
}

UserProfile ProfileStore::replay_write_log(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  UserProfile profile;
  profile.user_id = user_id;
  for (const auto& entry : record(user_id).log) {
    if (entry.style) {
      profile.communication_style = entry.style;
    } else {
      profile = apply_patches(profile, entry.patches, entry.at, std::nullopt).result.profile;
    }
  }
  return profile;
}

std::uint64_t ProfileStore::append_transcript(const std::string& user_id, const ChatTurn& turn,
                                              std::optional<std::string_view> display_name) {
  if (turn.text.empty()) throw GrowError(ErrorCode::InvalidArgument, "empty transcript turn");
  ChatTurn clean = turn;
  clean.text = scrub_pii(turn.text, display_name);
  return mutate(user_id, [&](UserRecord& rec) {
    const std::uint64_t id = rec.next_turn_id++;
    rec.transcript.push_back({id, std::move(clean)});
    return id;
  });
}

std::vector<StoredTurn> ProfileStore::transcript(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  return record(user_id).transcript;
}

void ProfileStore::rescrub_transcript(const std::string& user_id, std::string_view display_name) {
  mutate(user_id, [&](UserRecord& rec) {
    for (auto& t : rec.transcript) t.turn.text = scrub_pii(t.turn.text, display_name);
    return 0;
  });
}

std::size_t ProfileStore::purge_expired_transcripts(Timestamp now) {
  std::unique_lock lock(mutex_);
  const Timestamp cutoff = now - options_.transcript_retention;
  std::size_t removed = 0;
  for (auto& [_, rec] : users_) {
    removed += std::erase_if(rec.transcript, [&](const StoredTurn& t) { return t.turn.timestamp < cutoff; });
  }
  if (removed > 0) persist_locked();
  return removed;
}

UserSettings ProfileStore::settings(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  return record(user_id).settings;
}

void ProfileStore::put_settings(const std::string& user_id, const UserSettings& settings) {
  settings.window.table.validate();
  mutate(user_id, [&](UserRecord& rec) {
    rec.settings = settings;
    return 0;
  });
}

std::vector<std::pair<std::string, ReminderSettings>> ProfileStore::reminder_settings() const {
  std::shared_lock lock(mutex_);
  std::vector<std::pair<std::string, ReminderSettings>> out;
  for (const auto& [id, rec] : users_) out.emplace_back(id, rec.settings.reminders);
  return out;
}

void ProfileStore::mark_reminder_sent(const std::string& user_id, Timestamp at) {
  mutate(user_id, [&](UserRecord& rec) {
    rec.settings.reminders.last_sent = at;
    return 0;
  });
}

std::vector<ScheduledEvent> ProfileStore::events(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  return record(user_id).events;
}

std::vector<ScheduledEvent> ProfileStore::replace_goal_events(const std::string& user_id,
                                                              const std::string& goal_id,
                                                              std::vector<ScheduledEvent> events) {
  return mutate(user_id, [&](UserRecord& rec) {
    std::vector<ScheduledEvent> removed;
    std::erase_if(rec.events, [&](const ScheduledEvent& e) {
      if (e.event.goal_id != goal_id) return false;
      removed.push_back(e);
      return true;
    });
    for (auto& e : events) rec.events.push_back(std::move(e));
    return removed;
  });
}

ThemeCache ProfileStore::themes(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  return record(user_id).themes;
}

void ProfileStore::put_themes(const std::string& user_id, ThemeCache cache) {
  mutate(user_id, [&](UserRecord& rec) {
    rec.themes = std::move(cache);
    return 0;
  });
}

std::vector<ScheduledEvent> ProfileStore::delete_user_data(const std::string& user_id) {
  std::unique_lock lock(mutex_);
  auto it = users_.find(user_id);
  if (it == users_.end()) throw GrowError(ErrorCode::UserNotFound, "unknown user");
  std::vector<ScheduledEvent> events = std::move(it->second.events);
  users_.erase(it);
  persist_locked();
  return events;
}

json ProfileStore::dump() const {
  std::shared_lock lock(mutex_);
  return dump_locked();
}

json ProfileStore::dump_locked() const {
  json users = json::object();
  for (const auto& [id, rec] : users_) {
    json log = json::array();
    for (const auto& e : rec.log) {
      log.push_back({{"at", format_timestamp(e.at)},
                     {"patches", e.patches},
                     {"style", e.style ? json(*e.style) : json(nullptr)}});
    }
    json transcript = json::array();
    for (const auto& t : rec.transcript) transcript.push_back(turn_to_json(t));
    json events = json::array();
    for (const auto& e : rec.events) {
      json ev = e.event;
      ev["provider_event_id"] = e.provider_event_id;
      ev["plan_key"] = e.plan_key;
      events.push_back(std::move(ev));
    }
    users[id] = {
        {"profile", rec.profile},
        {"write_log", log},
        {"transcript", transcript},
        {"next_turn_id", rec.next_turn_id},
        {"settings", rec.settings},
        {"events", events},
        {"themes",
         {{"themes", rec.themes.themes},
          {"computed_on", rec.themes.computed_on ? json(format_date(*rec.themes.computed_on)) : json(nullptr)}}},
    };
  }
  return {{"version", 1}, {"users", users}};
}

void ProfileStore::load(const json& snapshot) {
  std::map<std::string, UserRecord> users;
  try {
    for (const auto& [id, u] : snapshot.at("users").items()) {
      UserRecord rec;
      rec.profile = u.at("profile").get<UserProfile>();
      for (const auto& e : u.at("write_log")) {
        WriteLogEntry entry;
        entry.at = parse_timestamp(e.at("at").get<std::string>());
        entry.patches = e.at("patches").get<std::vector<ToolCallPatch>>();
        if (!e.at("style").is_null()) entry.style = e.at("style").get<CommunicationStyle>();
        rec.log.push_back(std::move(entry));
      }
      for (const auto& t : u.at("transcript")) rec.transcript.push_back(turn_from_json(t));
      rec.next_turn_id = u.at("next_turn_id").get<std::uint64_t>();
      rec.settings = u.at("settings").get<UserSettings>();
      for (const auto& e : u.at("events")) {
        rec.events.push_back({e.get<CheckinEvent>(), e.at("provider_event_id").get<std::string>(),
                              e.value("plan_key", std::string())});
      }
      const auto& th = u.at("themes");
      rec.themes.themes = th.at("themes").get<std::vector<std::string>>();
      if (!th.at("computed_on").is_null()) rec.themes.computed_on = parse_date(th.at("computed_on").get<std::string>());
      users.emplace(id, std::move(rec));
    }
  } catch (const json::exception& e) {
    throw GrowError(ErrorCode::StorageUnavailable, std::string("malformed snapshot: ") + e.what());
  }
  std::unique_lock lock(mutex_);
  users_ = std::move(users);
}

std::vector<std::string> find_pii_in_dump(const json& dump) {
  static const std::set<std::string, std::less<>> kSkip = {
      "timestamp", "at", "startedAt", "completedAt", "start_date", "lastUpdated", "start",
      "last_sent", "enabled_at", "computed_on", "plan_key", "provider_event_id", "goal_id", "id"};
  std::vector<std::string> hits;
  auto walk = [&](auto&& self, const json& j, std::string_view key) -> void {
    if (j.is_object()) {
      for (const auto& [k, v] : j.items()) self(self, v, k);
    } else if (j.is_array()) {
      for (const auto& v : j) self(self, v, key);
    } else if (j.is_string() && !kSkip.contains(key)) {
      const auto& s = j.get_ref<const std::string&>();
      if (contains_pii_pattern(s)) hits.push_back(s);
    }
  };
  walk(walk, dump, "");
  return hits;
}

}  // namespace grow
