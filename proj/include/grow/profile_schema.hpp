#pragma once

// The saveProfile write protocol: which profile sections each phase may
// touch, and strict validation of model-produced payloads.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grow/domain.hpp"

namespace grow {

using json = nlohmann::json;

enum class Section { Demographic, PersonalityTraits, MentalHealthProfile, Bevs, MentalHealthGoals };
GROW_ENUM_NAMES(Section, "demographic", "personality_traits", "mental_health_profile", "bevs",
                "mental_health_goals");

enum class GoalWriteMode { None, CreateOnly, UpdateOnly };

struct PhaseWrites {
  std::vector<Section> sections;
  GoalWriteMode goals = GoalWriteMode::None;
};

// Introduction: demographic, personality_traits, mental_health_profile.
// ValuesCheckIn: bevs. GoalSetting: goal creation. ActiveCoaching: goal updates.
PhaseWrites permitted_writes(Phase phase);
bool is_section_permitted(Phase phase, Section section);

struct ToolCallPatch {
  Phase phase_tag = Phase::Introduction;
  Section section = Section::Demographic;
  json payload;

  bool operator==(const ToolCallPatch&) const = default;
};

void to_json(json& j, const ToolCallPatch& p);
void from_json(const json& j, ToolCallPatch& p);

// One saveProfile argument object -> one patch per top-level section.
// Throws GrowError(SchemaViolation) for a non-object or unknown section key.
std::vector<ToolCallPatch> split_tool_payload(Phase phase, const json& arguments);

// JSON schema of the saveProfile arguments the model may send in |phase|.
json tool_schema_for(Phase phase);

// --- validated payloads -----------------------------------------------------
// Every parser throws GrowError(SchemaViolation) naming the offending field.

struct IntroductionWrite {
  std::optional<std::string> display_name;  // session-only, never stored
  Demographic demographic;
  std::map<Trait, TraitLevel> traits;
  MentalHealthProfile mental_health;
};

// |patches| hold the introduction sections of a single write; all ten items
// must be present across them.
IntroductionWrite parse_introduction(std::span<const ToolCallPatch> patches);

BevsRecord parse_bevs_save(const json& payload);

struct GoalCreate {
  std::optional<std::string> goal_id;
  Goal goal;  // goal_id and last_updated filled in by the store
};
std::vector<GoalCreate> parse_goal_creates(const json& payload);

struct GoalUpdate {
  std::string goal_id;
  std::optional<std::string> description;
  std::optional<int> progress;
  std::optional<bool> completed;
  std::optional<GoalStatus> status;
  std::optional<std::uint32_t> completed_units;
  std::optional<std::uint32_t> weekly_target;
  std::optional<std::uint32_t> duration_days;
  std::optional<std::vector<std::string>> steps;
  std::optional<std::vector<std::string>> obstacles;
};
std::vector<GoalUpdate> parse_goal_updates(const json& payload);

// Applies |update| to |goal|; returns false when nothing changes.
bool apply_goal_update(Goal& goal, const GoalUpdate& update, Timestamp now);

}  // namespace grow
