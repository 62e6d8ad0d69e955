#include "grow/scheduler.hpp"

#include <algorithm>
#include <set>

#include "grow/error.hpp"

namespace grow {
namespace {

using std::chrono::days;
using std::chrono::minutes;

bool overlaps(Timestamp a_start, Timestamp a_end, const BusyInterval& b) {
  return a_start < b.end && b.start < a_end;
}

Timestamp slot_start(Date day, minutes local_minute, minutes utc_offset) {
  return Timestamp{day} + local_minute - utc_offset;
}

// Earliest slot on |day| within |bounds| that avoids |busy| and, when given,
// starts strictly after |after|.
std::optional<Timestamp> first_free_slot(Date day, const WindowBounds& bounds,
                                         std::span<const BusyInterval> busy,
                                         const ScheduleOptions& options,
                                         std::optional<Timestamp> after) {
  for (minutes m = bounds.begin; m + kCheckinLength <= bounds.end; m += kCheckinLength) {
    const Timestamp start = slot_start(day, m, options.utc_offset);
    const Timestamp end = start + kCheckinLength;
    if (after && start <= *after) continue;
    const bool clash = std::any_of(busy.begin(), busy.end(),
                                   [&](const BusyInterval& b) { return overlaps(start, end, b); });
    if (!clash) return start;
  }
  return std::nullopt;
}

struct Placement {
  Timestamp start;
  bool fallback = false;
};

Placement place(Date target, const WindowBounds& bounds, std::span<const BusyInterval> busy,
                const ScheduleOptions& options, std::optional<Timestamp> after) {
  for (int shift = 0; shift <= options.max_shift_days; ++shift) {
    if (auto slot = first_free_slot(target + days{shift}, bounds, busy, options, after)) {
      return {*slot, false};
    }
  }
  if (!after) return {slot_start(target, bounds.begin, options.utc_offset), true};
  // The end event must still follow the midpoint: take the first in-window
  // slot after it, ignoring busy time.
  for (Date day = target;; day += days{1}) {
    if (auto slot = first_free_slot(day, bounds, {}, options, after)) return {*slot, true};
  }
}

CheckinEvent make_event(const Goal& goal, CheckinKind kind, Placement placement,
                        const ScheduleOptions& options) {
  CheckinEvent event;
  event.goal_id = goal.goal_id;
  event.kind = kind;
  event.start = placement.start;
  event.fallback = placement.fallback;
  event.link = options.dashboard_url;
  event.title = std::string(kind == CheckinKind::Midpoint ? "Midpoint check-in: " : "Final check-in: ") +
                goal.description;
  std::string description = "Take a moment to reflect on your goal: " + goal.description + "\n";
  if (!goal.steps.empty()) {
    description += "Your steps:\n";
    for (const auto& step : goal.steps) description += "- " + step + "\n";
  }
  description += "Open your dashboard: " + options.dashboard_url;
  event.description = std::move(description);
  return event;
}

}  // namespace

void WindowTable::validate() const {
  std::vector<WindowBounds> sorted(bounds.begin(), bounds.end());
  for (const auto& b : sorted) {
    if (b.begin < minutes{0} || b.end > std::chrono::hours{24} || b.begin + kCheckinLength > b.end) {
      throw GrowError(ErrorCode::ConfigError, "time window must hold at least one slot within a day");
    }
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const WindowBounds& a, const WindowBounds& b) { return a.begin < b.begin; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].begin < sorted[i - 1].end) {
      throw GrowError(ErrorCode::ConfigError, "time windows overlap");
    }
  }
}

CheckinPlan schedule_goal_checkins(const Goal& goal, const TimeWindowPref& pref,
                                   std::span<const BusyInterval> busy,
                                   const ScheduleOptions& options) {
  if (goal.timeframe.duration_days < 1) {
    throw GrowError(ErrorCode::InvalidArgument, "goal timeframe must be at least one day");
  }
  const WindowBounds& bounds = pref.bounds();
  const Date start = goal.timeframe.start_date;
  const Date end_day = start + days{goal.timeframe.duration_days - 1};

  CheckinPlan plan;
  if (goal.timeframe.duration_days < 2) {
    plan.goal_too_short = true;
    plan.events.push_back(
        make_event(goal, CheckinKind::End, place(end_day, bounds, busy, options, std::nullopt), options));
    return plan;
  }

  const Date mid_day = start + days{goal.timeframe.duration_days / 2};
  const Placement mid = place(mid_day, bounds, busy, options, std::nullopt);

  std::vector<BusyInterval> with_mid(busy.begin(), busy.end());
  with_mid.push_back({mid.start, mid.start + kCheckinLength});
  const Placement end = place(end_day, bounds, with_mid, options, mid.start);

  plan.events.push_back(make_event(goal, CheckinKind::Midpoint, mid, options));
  plan.events.push_back(make_event(goal, CheckinKind::End, end, options));
  return plan;
}

std::chrono::days reminder_period(ReminderFrequency frequency) noexcept {
  switch (frequency) {
    case ReminderFrequency::Daily: return days{1};
    case ReminderFrequency::Biweekly: return days{3};
    case ReminderFrequency::Weekly: return days{7};
  }
  return days{7};
}

std::optional<Timestamp> next_reminder(const ReminderSettings& settings, Timestamp now) {
  if (!settings.enabled) return std::nullopt;
  const Timestamp anchor = settings.last_sent.value_or(settings.enabled_at.value_or(now));
  return anchor + reminder_period(settings.frequency);
}

std::vector<std::string> due_reminders(
    std::span<const std::pair<std::string, ReminderSettings>> all_settings, Timestamp now) {
  std::set<std::string> due;
  for (const auto& [user_id, settings] : all_settings) {
    auto next = next_reminder(settings, now);
    if (next && *next <= now) due.insert(user_id);
  }
  return {due.begin(), due.end()};
}

}  // namespace grow
