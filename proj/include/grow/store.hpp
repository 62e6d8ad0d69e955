#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "grow/domain.hpp"
#include "grow/profile_schema.hpp"
#include "grow/scheduler.hpp"

namespace grow {

using json = nlohmann::json;

enum class CoachGender { Unspecified, Female, Male, NonBinary };
GROW_ENUM_NAMES(CoachGender, "unspecified", "female", "male", "non-binary");

struct CoachPersona {
  std::string name = "Coach";
  std::string avatar = "sprout";
  CoachGender gender = CoachGender::Unspecified;

  bool operator==(const CoachPersona&) const = default;
};

struct UserSettings {
  ReminderSettings reminders;
  TimeWindowPref window;
  CoachPersona persona;
  std::chrono::minutes utc_offset{0};
  bool calendar_connected = false;

  bool operator==(const UserSettings&) const = default;
};

struct StoredTurn {
  std::uint64_t id = 0;
  ChatTurn turn;
};

struct ScheduledEvent {
  CheckinEvent event;
  std::string provider_event_id;
  // Goal timeframe, window and offset the event was planned for; a change
  // means the goal needs rescheduling.
  std::string plan_key;

  bool operator==(const ScheduledEvent&) const = default;
};

struct ThemeCache {
  std::vector<std::string> themes;
  std::optional<Date> computed_on;
};

// One accepted write. Payloads are stored already sanitized (no display
// name, PII scrubbed), so replaying the log reproduces the profile.
struct WriteLogEntry {
  Timestamp at;
  std::vector<ToolCallPatch> patches;
  std::optional<CommunicationStyle> style;
};

struct SaveResult {
  UserProfile profile;
  bool changed = false;
  // Name carried by an introduction write. Returned to the session, never stored.
  std::optional<std::string> display_name;
  std::vector<std::string> created_goals;
  std::vector<std::string> updated_goals;
  std::vector<std::string> completed_goals;
};

struct StoreOptions {
  std::chrono::days transcript_retention{90};
  // When set, the store loads from and writes through to this JSON file.
  std::optional<std::filesystem::path> snapshot_path;
};

// Keyed only by the opaque user id. Writes are serialized; reads share.
class ProfileStore {
 public:
  explicit ProfileStore(StoreOptions options = {});

  // Creates an empty profile if none exists. Returns the current profile.
  UserProfile register_user(const std::string& user_id);
  bool has_user(const std::string& user_id) const;
  UserProfile load_profile(const std::string& user_id) const;
  std::vector<std::string> user_ids() const;

  // Applies one saveProfile call atomically. Errors, in check order:
  // WriteOutOfPhase, DuplicateWrite, SchemaViolation, UnknownGoal. A goal
  // update that changes nothing is accepted as a no-op.
  SaveResult save_profile(const std::string& user_id, std::span<const ToolCallPatch> patches,
                          Timestamp now,
                          std::optional<std::string_view> display_name = std::nullopt);
  SaveResult save_profile(const std::string& user_id, const ToolCallPatch& patch, Timestamp now,
                          std::optional<std::string_view> display_name = std::nullopt);

  void set_communication_style(const std::string& user_id, const CommunicationStyle& style,
                               Timestamp now);

  std::vector<WriteLogEntry> write_log(const std::string& user_id) const;
  // Rebuilds the profile from an empty one by re-applying the write log.
  UserProfile replay_write_log(const std::string& user_id) const;

  // Scrubs the text and appends it. Throws InvalidArgument for an empty turn.
  std::uint64_t append_transcript(const std::string& user_id, const ChatTurn& turn,
                                  std::optional<std::string_view> display_name = std::nullopt);
  std::vector<StoredTurn> transcript(const std::string& user_id) const;
  // Re-applies the scrubber to stored turns once a display name is learned.
  void rescrub_transcript(const std::string& user_id, std::string_view display_name);
  // Drops turns older than the retention window. Returns how many were removed.
  std::size_t purge_expired_transcripts(Timestamp now);

  UserSettings settings(const std::string& user_id) const;
  void put_settings(const std::string& user_id, const UserSettings& settings);
  std::vector<std::pair<std::string, ReminderSettings>> reminder_settings() const;
  void mark_reminder_sent(const std::string& user_id, Timestamp at);

  std::vector<ScheduledEvent> events(const std::string& user_id) const;
  // Replaces the goal's events; returns the ones removed.
  std::vector<ScheduledEvent> replace_goal_events(const std::string& user_id,
                                                  const std::string& goal_id,
                                                  std::vector<ScheduledEvent> events);

  ThemeCache themes(const std::string& user_id) const;
  void put_themes(const std::string& user_id, ThemeCache cache);

  // Removes everything held for the user and returns the calendar events that
  // the caller must delete at the provider. Throws UserNotFound.
  std::vector<ScheduledEvent> delete_user_data(const std::string& user_id);

  json dump() const;
  void load(const json& snapshot);

 private:
  struct UserRecord {
    UserProfile profile;
    std::vector<WriteLogEntry> log;
    std::vector<StoredTurn> transcript;
    std::uint64_t next_turn_id = 1;
    UserSettings settings;
    std::vector<ScheduledEvent> events;
    ThemeCache themes;
  };

  UserRecord& record(const std::string& user_id);
  const UserRecord& record(const std::string& user_id) const;

  template <typename Fn>
  auto mutate(const std::string& user_id, Fn&& fn);

  void persist_locked() const;
  json dump_locked() const;

  StoreOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, UserRecord> users_;
};

void to_json(json& j, const ReminderSettings& r);
void from_json(const json& j, ReminderSettings& r);
void to_json(json& j, const CoachPersona& p);
void from_json(const json& j, CoachPersona& p);
void to_json(json& j, const UserSettings& s);
void from_json(const json& j, UserSettings& s);
void to_json(json& j, const CheckinEvent& e);
void from_json(const json& j, CheckinEvent& e);

// Audit helper: every stored free-text string in |dump| (timestamps and ids
// excluded) that matches the email or phone scrub patterns.
std::vector<std::string> find_pii_in_dump(const json& dump);

}  // namespace grow
