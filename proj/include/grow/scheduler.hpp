#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grow/domain.hpp"

namespace grow {

enum class TimeWindow { Morning, Afternoon, Evening, Night };
GROW_ENUM_NAMES(TimeWindow, "morning", "afternoon", "evening", "night");

// Local wall-clock bounds, minutes after midnight, half-open.
struct WindowBounds {
  std::chrono::minutes begin;
  std::chrono::minutes end;

  bool operator==(const WindowBounds&) const = default;
};

struct WindowTable {
  std::array<WindowBounds, 4> bounds = {{
      {std::chrono::hours{8}, std::chrono::hours{12}},
      {std::chrono::hours{12}, std::chrono::hours{17}},
      {std::chrono::hours{17}, std::chrono::hours{21}},
      {std::chrono::hours{21}, std::chrono::hours{24}},
  }};

  const WindowBounds& operator[](TimeWindow w) const { return bounds[static_cast<std::size_t>(w)]; }

  // Throws GrowError(ConfigError) if any window is empty, leaves [0h, 24h],
  // or overlaps another.
  void validate() const;

  bool operator==(const WindowTable&) const = default;
};

struct TimeWindowPref {
  TimeWindow window = TimeWindow::Evening;
  WindowTable table;

  const WindowBounds& bounds() const { return table[window]; }
  bool operator==(const TimeWindowPref&) const = default;
};

// Free/busy granularity only: no titles, attendees or descriptions.
struct BusyInterval {
  Timestamp start;
  Timestamp end;

  bool operator==(const BusyInterval&) const = default;
};

enum class CheckinKind { Midpoint, End };
GROW_ENUM_NAMES(CheckinKind, "midpoint", "end");

inline constexpr std::chrono::minutes kCheckinLength{30};

struct CheckinEvent {
  std::string goal_id;
  CheckinKind kind = CheckinKind::End;
  Timestamp start;
  std::chrono::minutes duration = kCheckinLength;
  std::string link;
  // Set when no conflict-free slot existed and the event was placed anyway.
  bool fallback = false;
  std::string title;
  std::string description;

  bool operator==(const CheckinEvent&) const = default;
};

struct ScheduleOptions {
  std::chrono::minutes utc_offset{0};
  std::string dashboard_url = "http://localhost:8080/#/dashboard";
  int max_shift_days = 2;
};

struct CheckinPlan {
  std::vector<CheckinEvent> events;
  // duration_days < 2: only the end event is produced.
  bool goal_too_short = false;
};

// Midpoint lands on start + floor(duration/2), end on the final day. Each
// event takes the earliest 30-minute slot of the preferred window that avoids
// |busy|; a full day shifts the search up to max_shift_days forward, after
// which the event is placed at the window's opening slot on the original day.
// The end event also avoids the midpoint event and always starts after it.
CheckinPlan schedule_goal_checkins(const Goal& goal, const TimeWindowPref& pref,
                                   std::span<const BusyInterval> busy,
                                   const ScheduleOptions& options = {});

// ---------------------------------------------------------------------------
// Email cadence

enum class ReminderFrequency { Daily, Biweekly, Weekly };
GROW_ENUM_NAMES(ReminderFrequency, "daily", "biweekly", "weekly");

// daily = 1 day, biweekly = twice a week (every 3 days), weekly = 7 days.
std::chrono::days reminder_period(ReminderFrequency frequency) noexcept;

struct ReminderSettings {
  ReminderFrequency frequency = ReminderFrequency::Weekly;
  bool enabled = false;
  std::optional<Timestamp> last_sent;
  // When reminders were switched on; anchors the first reminder.
  std::optional<Timestamp> enabled_at;

  bool operator==(const ReminderSettings&) const = default;
};

// nullopt when disabled. Anchor is last_sent, else enabled_at, else now.
std::optional<Timestamp> next_reminder(const ReminderSettings& settings, Timestamp now);

// Users whose next reminder is due at |now|, sorted, each listed once.
std::vector<std::string> due_reminders(
    std::span<const std::pair<std::string, ReminderSettings>> all_settings, Timestamp now);

}  // namespace grow
