#pragma once

// Brute-force reference implementations. Deliberately naive: they share no
// code with the library and trade speed for obviousness.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "grow/scheduler.hpp"

namespace grow::oracle {

// 100 * c / t rounded half up by long division, capped at 100.
inline int progress(std::uint32_t c, std::uint32_t t) {
  const std::uint64_t scaled = 100ull * c;
  std::uint64_t q = scaled / t;
  const std::uint64_t r = scaled % t;
  if (2 * r >= t) ++q;
  return static_cast<int>(std::min<std::uint64_t>(q, 100));
}

// Walks every day of the window and asks whether anyone checked in on it.
inline int consistency(std::span<const Date> checkins, Date today, int window) {
  int hit = 0;
  for (int k = 0; k < window; ++k) {
    const Date day = today - std::chrono::days{k};
    if (std::find(checkins.begin(), checkins.end(), day) != checkins.end()) ++hit;
  }
  // Rounded half up, done with doubles on purpose (different path from the library).
  const double pct = 100.0 * hit / window;
  return static_cast<int>(pct + 0.5 + 1e-9);
}

struct OracleEvent {
  CheckinKind kind;
  Timestamp start;
  bool fallback;
};

namespace detail {

using std::chrono::minutes;

// A slot is free when none of its 30 minutes falls inside a busy interval.
inline bool minute_free(Timestamp slot, std::span<const BusyInterval> busy) {
  for (minutes m{0}; m < kCheckinLength; ++m) {
    const Timestamp t = slot + m;
    for (const auto& b : busy) {
      if (b.start <= t && t < b.end) return false;
    }
  }
  return true;
}

// Every slot start in the window, over a range of days.
inline std::vector<Timestamp> all_slots(Date from, int days, const WindowBounds& w, minutes offset) {
  std::vector<Timestamp> out;
  for (int d = 0; d < days; ++d) {
    for (minutes m = w.begin; m + kCheckinLength <= w.end; m += minutes{1}) {
      if ((m - w.begin).count() % kCheckinLength.count() != 0) continue;
      out.push_back(Timestamp{from + std::chrono::days{d}} + m - offset);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::optional<Timestamp> earliest(const std::vector<Timestamp>& slots, std::span<const BusyInterval> busy,
                                         std::optional<Timestamp> after) {
  for (Timestamp s : slots) {
    if (after && s <= *after) continue;
    if (minute_free(s, busy)) return s;
  }
  return std::nullopt;
}

}  // namespace detail

// Exhaustive enumeration of candidate slots for both check-ins.
inline std::vector<OracleEvent> schedule(const Goal& goal, const TimeWindowPref& pref,
                                         std::span<const BusyInterval> busy, const ScheduleOptions& options) {
  using namespace detail;
  const auto& w = pref.bounds();
  const int span_days = options.max_shift_days + 1;
  const Date start = goal.timeframe.start_date;
  const Date last = start + std::chrono::days{goal.timeframe.duration_days - 1};
  std::vector<OracleEvent> out;

  std::optional<Timestamp> mid_start;
  std::vector<BusyInterval> blocked(busy.begin(), busy.end());
  if (goal.timeframe.duration_days >= 2) {
    const Date mid = start + std::chrono::days{goal.timeframe.duration_days / 2};
    auto found = earliest(all_slots(mid, span_days, w, options.utc_offset), blocked, std::nullopt);
    const bool fb = !found;
    mid_start = found.value_or(Timestamp{mid} + w.begin - options.utc_offset);
    out.push_back({CheckinKind::Midpoint, *mid_start, fb});
    blocked.push_back({*mid_start, *mid_start + kCheckinLength});
  }
  auto found = earliest(all_slots(last, span_days, w, options.utc_offset), blocked, mid_start);
  if (found) {
    out.push_back({CheckinKind::End, *found, false});
  } else if (!mid_start) {
    out.push_back({CheckinKind::End, Timestamp{last} + w.begin - options.utc_offset, true});
  } else {
    auto any = earliest(all_slots(last, 400, w, options.utc_offset), {}, mid_start);
    out.push_back({CheckinKind::End, *any, true});
  }
  return out;
}

}  // namespace grow::oracle
