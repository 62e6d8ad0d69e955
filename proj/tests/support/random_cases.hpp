#pragma once

#include <random>
#include <vector>

#include "grow/scheduler.hpp"
#include "support/test_support.hpp"

namespace grow::fx {

struct ScheduleCase {
  Goal goal;
  TimeWindowPref pref;
  std::vector<BusyInterval> busy;
  ScheduleOptions options;
};

// Dense enough that shifts and fallbacks happen regularly.
inline ScheduleCase random_schedule_case(std::mt19937& rng) {
  using std::chrono::minutes;
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  ScheduleCase c;
  c.goal.goal_id = "goal-1";
  c.goal.description = "Practice";
  c.goal.timeframe.start_date = parse_date("2026-03-02") + std::chrono::days{pick(0, 60)};
  c.goal.timeframe.duration_days = static_cast<std::uint32_t>(pick(1, 5) == 1 ? pick(1, 2) : pick(2, 30));
  c.pref.window = static_cast<TimeWindow>(pick(0, 3));
  const int offsets[] = {0, 0, -300, -480, 60, 330, 540, 840, -720};
  c.options.utc_offset = minutes{offsets[pick(0, 8)]};
  c.options.max_shift_days = 2;

  const Timestamp span_start = Timestamp{c.goal.timeframe.start_date} - std::chrono::hours{24};
  const int span_minutes = static_cast<int>((c.goal.timeframe.duration_days + 5) * 24 * 60);
  const int n = pick(0, 60);
  // Some cases block whole windows so the shift and fallback paths run.
  const bool heavy = pick(0, 3) == 0;
  for (int i = 0; i < n; ++i) {
    const Timestamp s = span_start + minutes{pick(0, span_minutes)};
    const int len = heavy ? pick(60, 24 * 60) : pick(5, 180);
    c.busy.push_back({s, s + minutes{len}});
  }
  return c;
}

}  // namespace grow::fx
