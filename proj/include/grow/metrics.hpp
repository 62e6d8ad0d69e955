#pragma once

// Dashboard numbers: overall progress, check-in consistency, communication
// style, conversation themes and the values dartboard.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "grow/domain.hpp"
#include "grow/gateway.hpp"
#include "grow/scheduler.hpp"

namespace grow {

using json = nlohmann::json;

struct OverallProgress {
  int percent = 0;
  std::size_t active_count = 0;

  bool operator==(const OverallProgress&) const = default;
};

// Mean progress of active goals, rounded half away from zero. Paused and
// completed goals are left out.
OverallProgress overall_goal_progress(std::span<const Goal> goals);

inline constexpr int kConsistencyWindowDays = 7;

// round(100 * distinct check-in days in [today - window + 1, today] / window).
// Days after |today| are ignored.
int checkin_consistency(std::span<const Date> checkin_days, Date today, int window_days = kConsistencyWindowDays);
int checkin_consistency(std::span<const Timestamp> checkins, Date today, std::chrono::minutes utc_offset,
                        int window_days = kConsistencyWindowDays);

// ---------------------------------------------------------------------------
// Communication style

struct StyleMetrics {
  double avg_words_per_user_message = 0;
  // Exclamation marks, emoji and emoticons per message.
  double emoji_or_exclaim_rate = 0;
  // Share of word tokens that contain a digit.
  double digit_token_ratio = 0;
  // Share of word tokens that are contractions or common slang.
  double contraction_slang_rate = 0;
};

struct StyleThresholds {
  double short_max_words = 12;
  double expressive_min_rate = 0.2;
  double data_driven_min_ratio = 0.05;
  double casual_min_rate = 0.15;
};

// Throws InsufficientData when |user_messages| is empty.
StyleMetrics compute_style_metrics(std::span<const std::string> user_messages);
CommunicationStyle fallback_style(const StyleMetrics& m, const StyleThresholds& t = {});

// Accepts exactly the four keys with their enumerated values; anything else
// is nullopt.
std::optional<CommunicationStyle> parse_style_document(const json& doc);

struct StyleResult {
  CommunicationStyle style;
  StyleMetrics metrics;
  bool from_model = false;
};

// With a gateway, asks the model and validates the reply; without one, or
// when the reply is unusable, applies the fallback thresholds.
// |prompt_template| takes [metrics] and [transcript].
StyleResult classify_style(std::span<const std::string> user_messages, ModelGateway* gateway,
                           std::string_view prompt_template, const LlmParams& params = {},
                           const StyleThresholds& thresholds = {});

// ---------------------------------------------------------------------------
// Themes

inline constexpr std::size_t kMaxThemes = 5;
inline constexpr std::size_t kMaxThemeWords = 8;

struct ThemeResult {
  std::vector<std::string> themes;
  bool stale = false;
  bool recomputed = false;
};

// Extracts themes from a model reply: {"themes": [...]} or a bare array.
// Keeps at most five, drops any longer than eight words.
std::vector<std::string> parse_themes(std::string_view model_text);

// Returns |previous| untouched when it was computed on |today|. On gateway
// failure returns |previous| with stale set. Throws InsufficientData for an
// empty history. |prompt_template| takes [history].
ThemeResult summarize_themes(std::span<const ChatTurn> history, ModelGateway& gateway,
                             std::string_view prompt_template, const std::vector<std::string>& previous,
                             std::optional<Date> previous_on, Date today, const LlmParams& params = {});

// ---------------------------------------------------------------------------
// Dartboard

struct DartboardPoint {
  std::string domain;
  int score = 0;
  double radius = 0;
};

// radius = (8 - score) / 7. Throws NotReady unless the check-in is done.
std::vector<DartboardPoint> dartboard_view(const std::optional<BevsRecord>& bevs);

// ---------------------------------------------------------------------------
// Dashboard

enum class ResourceCategory { Campus, Crisis, SelfGuided };
GROW_ENUM_NAMES(ResourceCategory, "campus", "crisis", "self-guided");

struct SupportResource {
  std::string title;
  std::string description;
  std::string url;
  ResourceCategory category = ResourceCategory::Campus;

  bool operator==(const SupportResource&) const = default;
};

void to_json(json& j, const SupportResource& r);

struct GoalView {
  std::string goal_id;
  std::string description;
  std::uint32_t duration_days = 0;
  std::vector<std::string> next_steps;
  int progress = 0;
  GoalStatus status = GoalStatus::Active;
  std::vector<CheckinEvent> scheduled_checkins;
};

struct DashboardPayload {
  std::string display_phase;
  int overall_progress = 0;
  std::size_t active_goal_count = 0;
  int consistency = 0;
  std::vector<GoalView> goals_view;
  std::vector<std::string> themes;
  bool themes_stale = false;
  std::optional<CommunicationStyle> style;
  std::vector<DartboardPoint> dartboard;
  std::vector<SupportResource> resources;
};

struct DashboardInputs {
  Phase phase = Phase::Introduction;
  const UserProfile* profile = nullptr;
  std::span<const CheckinEvent> events;
  std::span<const Timestamp> checkins;
  Date today;
  std::chrono::minutes utc_offset{0};
  std::vector<std::string> themes;
  bool themes_stale = false;
  std::vector<SupportResource> resources;
};

DashboardPayload build_dashboard(const DashboardInputs& in);

void to_json(json& j, const DashboardPayload& d);

}  // namespace grow
