#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grow/time.hpp"

namespace grow {

// Every enum that crosses a wire or file boundary registers its spellings
// here; to_string/parse_enum are the only conversions used.
template <typename E>
struct EnumNames;

template <typename E>
concept NamedEnum = requires { EnumNames<E>::names; };

template <NamedEnum E>
constexpr std::string_view to_string(E e) {
  return EnumNames<E>::names[static_cast<std::size_t>(e)];
}

template <NamedEnum E>
constexpr std::optional<E> parse_enum(std::string_view text) {
  const auto& names = EnumNames<E>::names;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  return std::nullopt;
}

#define GROW_ENUM_NAMES(Type, ...)                                        \
  template <>                                                             \
  struct EnumNames<Type> {                                                \
    static constexpr auto names = std::to_array<std::string_view>({__VA_ARGS__}); \
  }

// ---------------------------------------------------------------------------
// Phase

enum class Phase { Introduction, ValuesCheckIn, GoalSetting, ActiveCoaching };
GROW_ENUM_NAMES(Phase, "Introduction", "ValuesCheckIn", "GoalSetting", "ActiveCoaching");

// Edges: Introduction->ValuesCheckIn, ValuesCheckIn->GoalSetting,
// GoalSetting->ActiveCoaching, ActiveCoaching->GoalSetting.
bool is_legal_transition(Phase from, Phase to) noexcept;

// Dashboard label. The values check-in is shown as part of "Introduction".
std::string_view display_label(Phase phase) noexcept;

// ---------------------------------------------------------------------------
// Profile sections

enum class Trait { Openness, Conscientiousness, Extraversion, Agreeableness, Neuroticism };
GROW_ENUM_NAMES(Trait, "Openness", "Conscientiousness", "Extraversion", "Agreeableness",
                "Neuroticism");
inline constexpr std::array<Trait, 5> kTraits = {Trait::Openness, Trait::Conscientiousness,
                                                 Trait::Extraversion, Trait::Agreeableness,
                                                 Trait::Neuroticism};

enum class TraitLevel { High, Moderate, Low };
GROW_ENUM_NAMES(TraitLevel, "high", "moderate", "low");

enum class EmotionalAwareness { High, Medium, Low };
GROW_ENUM_NAMES(EmotionalAwareness, "high", "medium", "low");

enum class CopingStyle { Healthy, Mixed, Avoidant };
GROW_ENUM_NAMES(CopingStyle, "healthy", "mixed", "avoidant");

enum class EncouragementPreference { Praise, Progress, Achievement, Effort };
GROW_ENUM_NAMES(EncouragementPreference, "praise", "progress", "achievement", "effort");

// The first name is deliberately absent: it lives only in the session.
struct Demographic {
  std::optional<std::string> college_year;
  std::optional<std::string> major;

  bool operator==(const Demographic&) const = default;
};

struct MentalHealthProfile {
  std::optional<EmotionalAwareness> emotional_awareness;
  std::optional<CopingStyle> coping_style;
  std::optional<EncouragementPreference> encouragement_preference;

  bool operator==(const MentalHealthProfile&) const = default;
};

// ---------------------------------------------------------------------------
// Goals

enum class MeasureUnit { Count, Minutes };
GROW_ENUM_NAMES(MeasureUnit, "count", "minutes");

enum class GoalStatus { Active, Paused, Completed };
GROW_ENUM_NAMES(GoalStatus, "active", "paused", "completed");

struct GoalMeasures {
  MeasureUnit unit = MeasureUnit::Count;
  std::uint32_t weekly_target = 1;
  std::uint32_t completed_units = 0;

  bool operator==(const GoalMeasures&) const = default;
};

struct GoalTimeframe {
  Date start_date;
  std::uint32_t duration_days = 7;

  bool operator==(const GoalTimeframe&) const = default;
};

struct Goal {
  std::string goal_id;
  std::string description;
  GoalMeasures measures;
  GoalTimeframe timeframe;
  std::vector<std::string> steps;
  std::vector<std::string> obstacles;
  int progress = 0;
  GoalStatus status = GoalStatus::Active;
  Timestamp last_updated;

  bool operator==(const Goal&) const = default;
};

// ---------------------------------------------------------------------------
// Values check-in

enum class BevsStep { Intro, CollectValues, CollectScores, Confirm, Done };
GROW_ENUM_NAMES(BevsStep, "intro", "collect_values", "collect_scores", "confirm", "done");

inline constexpr std::array<std::string_view, 4> kBevsDomains = {
    "Work/Studies", "Relationships", "Personal Growth/Health", "Leisure"};

struct BevsAssessment {
  std::string domain;
  std::string value_statement;
  int score = 0;

  bool operator==(const BevsAssessment&) const = default;
};

struct BevsRecord {
  Timestamp started_at;
  std::optional<Timestamp> completed_at;
  BevsStep current_step = BevsStep::Intro;
  int domain_index = 0;
  std::vector<BevsAssessment> assessments;
  // Value statement for the current domain, held until its score arrives.
  std::optional<std::string> pending_value;

  bool done() const noexcept { return current_step == BevsStep::Done; }
  bool operator==(const BevsRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Communication style

enum class Tone { Formal, Casual };
GROW_ENUM_NAMES(Tone, "formal", "casual");
enum class MessageLength { Short, Long };
GROW_ENUM_NAMES(MessageLength, "short", "long");
enum class EmotionalStyle { Expressive, Neutral };
GROW_ENUM_NAMES(EmotionalStyle, "expressive", "neutral");
enum class ThinkingStyle { DataDriven, ExperienceBased };
GROW_ENUM_NAMES(ThinkingStyle, "data-driven", "experience-based");

struct CommunicationStyle {
  Tone tone = Tone::Formal;
  MessageLength length = MessageLength::Short;
  EmotionalStyle emotional_style = EmotionalStyle::Neutral;
  ThinkingStyle thinking_style = ThinkingStyle::ExperienceBased;

  bool operator==(const CommunicationStyle&) const = default;
};

// ---------------------------------------------------------------------------
// Conversation turns

enum class Speaker { User, Coach };
GROW_ENUM_NAMES(Speaker, "user", "coach");

struct ChatTurn {
  Speaker speaker = Speaker::User;
  std::string text;
  Timestamp timestamp;

  bool operator==(const ChatTurn&) const = default;
};

// ---------------------------------------------------------------------------

struct UserProfile {
  std::string user_id;
  Demographic demographic;
  std::map<Trait, TraitLevel> personality_traits;
  MentalHealthProfile mental_health_profile;
  std::optional<BevsRecord> bevs;
  std::vector<Goal> mental_health_goals;
  std::optional<CommunicationStyle> communication_style;
  bool intro_complete = false;

  bool operator==(const UserProfile&) const = default;
};

// Rounds 100 * completed / target half away from zero and caps at 100.
// Throws GrowError(InvalidTarget) when weekly_target is zero.
int compute_goal_progress(std::uint32_t completed_units, std::uint32_t weekly_target);

// Accepts a single integer token in [1, 7], surrounding whitespace allowed.
// Throws GrowError(ScoreOutOfRange) otherwise.
int validate_bevs_score(std::string_view raw);

// The ten introduction items, in the order the coach asks for them.
inline constexpr std::array<std::string_view, 10> kIntroFields = {
    "demographic.college_year",
    "demographic.major",
    "mental_health_profile.emotional_awareness",
    "mental_health_profile.coping_style",
    "mental_health_profile.encouragement_preference",
    "personality_traits.Openness",
    "personality_traits.Conscientiousness",
    "personality_traits.Extraversion",
    "personality_traits.Agreeableness",
    "personality_traits.Neuroticism",
};

std::vector<std::string> intro_missing_fields(const UserProfile& profile);
bool is_intro_complete(const UserProfile& profile);

const Goal* find_goal(const UserProfile& profile, std::string_view goal_id);

}  // namespace grow
