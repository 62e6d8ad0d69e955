#include "grow/domain.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "grow/error.hpp"

namespace grow {

bool is_legal_transition(Phase from, Phase to) noexcept {
  switch (from) {
    case Phase::Introduction: return to == Phase::ValuesCheckIn;
    case Phase::ValuesCheckIn: return to == Phase::GoalSetting;
    case Phase::GoalSetting: return to == Phase::ActiveCoaching;
    case Phase::ActiveCoaching: return to == Phase::GoalSetting;
  }
  return false;
}

std::string_view display_label(Phase phase) noexcept {
  switch (phase) {
    case Phase::Introduction:
    case Phase::ValuesCheckIn: return "Introduction";
    case Phase::GoalSetting: return "Goal Setting";
    case Phase::ActiveCoaching: return "Active Coaching";
  }
  return "Introduction";
}

int compute_goal_progress(std::uint32_t completed_units, std::uint32_t weekly_target) {
  if (weekly_target == 0) {
    throw GrowError(ErrorCode::InvalidTarget, "weekly_target must be at least 1");
  }
  // Both operands are non-negative, so half-away-from-zero is floor(x + 1/2).
  const std::uint64_t num = 200ULL * completed_units + weekly_target;
  const std::uint64_t den = 2ULL * weekly_target;
  return static_cast<int>(std::min<std::uint64_t>(100, num / den));
}

int validate_bevs_score(std::string_view raw) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!raw.empty() && is_space(raw.front())) raw.remove_prefix(1);
  while (!raw.empty() && is_space(raw.back())) raw.remove_suffix(1);

  int value = 0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
  if (raw.empty() || ec != std::errc{} || ptr != raw.data() + raw.size() || value < 1 ||
      value > 7) {
    throw GrowError(ErrorCode::ScoreOutOfRange,
                    "score must be an integer from 1 to 7, got '" + std::string(raw) + "'");
  }
  return value;
}

std::vector<std::string> intro_missing_fields(const UserProfile& profile) {
  std::vector<std::string> missing;
  const auto& d = profile.demographic;
  const auto& m = profile.mental_health_profile;
  const bool present[] = {
      d.college_year.has_value() && !d.college_year->empty(),
      d.major.has_value() && !d.major->empty(),
      m.emotional_awareness.has_value(),
      m.coping_style.has_value(),
      m.encouragement_preference.has_value(),
  };
  for (std::size_t i = 0; i < std::size(present); ++i) {
    if (!present[i]) missing.emplace_back(kIntroFields[i]);
  }
  for (std::size_t i = 0; i < kTraits.size(); ++i) {
    if (!profile.personality_traits.contains(kTraits[i])) {
      missing.emplace_back(kIntroFields[std::size(present) + i]);
    }
  }
  return missing;
}

bool is_intro_complete(const UserProfile& profile) {
  return intro_missing_fields(profile).empty();
}

const Goal* find_goal(const UserProfile& profile, std::string_view goal_id) {
  auto it = std::find_if(profile.mental_health_goals.begin(), profile.mental_health_goals.end(),
                         [&](const Goal& g) { return g.goal_id == goal_id; });
  return it == profile.mental_health_goals.end() ? nullptr : &*it;
}

}  // namespace grow
