#include "grow/profile_schema.hpp"

#include <algorithm>
#include <initializer_list>
#include <set>

#include "grow/error.hpp"

namespace grow {
namespace {

[[noreturn]] void violation(const std::string& where, const std::string& what) {
  throw GrowError(ErrorCode::SchemaViolation, where + ": " + what);
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) violation(where, "expected an object");
  return j;
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      violation(where, "unexpected field '" + key + "'");
    }
  }
}

std::optional<std::string> opt_text(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  const json& v = j.at(key);
  if (!v.is_string()) violation(where + "." + key, "expected a string");
  std::string s = v.get<std::string>();
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) violation(where + "." + key, "must not be blank");
  s = s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
  return s;
}

std::string req_text(const json& j, const char* key, const std::string& where) {
  auto s = opt_text(j, key, where);
  if (!s) violation(where + "." + key, "is required");
  return *s;
}

std::optional<std::int64_t> opt_int(const json& j, const char* key, const std::string& where,
                                    std::int64_t min, std::int64_t max) {
  if (!j.contains(key)) return std::nullopt;
  const json& v = j.at(key);
  if (!v.is_number_integer()) violation(where + "." + key, "expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(max)) {
    violation(where + "." + key, "out of range");
  }
  const auto n = v.get<std::int64_t>();
  if (n < min || n > max) violation(where + "." + key, "out of range");
  return n;
}

std::int64_t req_int(const json& j, const char* key, const std::string& where, std::int64_t min,
                     std::int64_t max) {
  auto n = opt_int(j, key, where, min, max);
  if (!n) violation(where + "." + key, "is required");
  return *n;
}

std::optional<bool> opt_bool(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  if (!j.at(key).is_boolean()) violation(where + "." + key, "expected a boolean");
  return j.at(key).get<bool>();
}

template <NamedEnum E>
std::optional<E> opt_enum(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  if (!j.at(key).is_string()) violation(where + "." + key, "expected a string");
  auto value = parse_enum<E>(j.at(key).get<std::string>());
  if (!value) violation(where + "." + key, "unknown value '" + j.at(key).get<std::string>() + "'");
  return value;
}

std::vector<std::string> text_list(const json& j, const std::string& where, std::size_t min,
                                   std::size_t max) {
  if (!j.is_array()) violation(where, "expected an array");
  if (j.size() < min || j.size() > max) {
    violation(where, "expected " + std::to_string(min) + " to " + std::to_string(max) + " entries");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    json wrapper = {{"item", j[i]}};
    out.push_back(req_text(wrapper, "item", where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

bool valid_goal_id(std::string_view id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

json enum_schema(std::span<const std::string_view> names) {
  json values = json::array();
  for (auto n : names) values.push_back(n);
  return {{"type", "string"}, {"enum", values}};
}

template <NamedEnum E>
json enum_schema() {
  return enum_schema(EnumNames<E>::names);
}

json goal_create_schema() {
  return {
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"description", "measures", "timeframe", "steps", "completed", "progress"}},
      {"properties",
       {{"description", {{"type", "string"}}},
        {"measures",
         {{"type", "object"},
          {"additionalProperties", false},
          {"required", {"unit", "weekly_target"}},
          {"properties",
           {{"unit", {{"type", "string"}, {"enum", {"count", "frequency", "minutes"}}}},
            {"weekly_target", {{"type", "integer"}, {"minimum", 1}}},
            {"completed_units", {{"type", "integer"}, {"minimum", 0}}}}}}},
        {"timeframe",
         {{"type", "object"},
          {"additionalProperties", false},
          {"required", {"start_date", "duration_days"}},
          {"properties",
           {{"start_date", {{"type", "string"}, {"format", "date"}}},
            {"duration_days", {{"type", "integer"}, {"minimum", 1}}}}}}},
        {"steps", {{"type", "array"}, {"minItems", 1}, {"maxItems", 3}, {"items", {{"type", "string"}}}}},
        {"obstacles", {{"type", "array"}, {"items", {{"type", "string"}}}}},
        {"completed", {{"const", false}}},
        {"progress", {{"const", 0}}}}},
  };
}

json goal_update_schema() {
  return {
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"goal_id"}},
      {"properties",
       {{"goal_id", {{"type", "string"}}},
        {"description", {{"type", "string"}}},
        {"progress", {{"type", "integer"}, {"minimum", 0}, {"maximum", 100}}},
        {"completed", {{"type", "boolean"}}},
        {"status", enum_schema<GoalStatus>()},
        {"completed_units", {{"type", "integer"}, {"minimum", 0}}},
        {"measures",
         {{"type", "object"},
          {"additionalProperties", false},
          {"properties",
           {{"weekly_target", {{"type", "integer"}, {"minimum", 1}}},
            {"completed_units", {{"type", "integer"}, {"minimum", 0}}}}}}},
        {"timeframe",
         {{"type", "object"},
          {"additionalProperties", false},
          {"properties", {{"duration_days", {{"type", "integer"}, {"minimum", 1}}}}}}},
        {"steps", {{"type", "array"}, {"minItems", 1}, {"maxItems", 3}, {"items", {{"type", "string"}}}}},
        {"obstacles", {{"type", "array"}, {"items", {{"type", "string"}}}}},
        {"lastUpdated", {{"type", "string"}}}}},
  };
}

json section_schema(Section section, GoalWriteMode goals) {
  switch (section) {
    case Section::Demographic:
      return {{"type", "object"},
              {"additionalProperties", false},
              {"required", {"college_year", "major"}},
              {"properties",
               {{"name", {{"type", "string"}}},
                {"college_year", {{"type", "string"}}},
                {"major", {{"type", "string"}}}}}};
    case Section::PersonalityTraits: {
      json props = json::object();
      json required = json::array();
      for (Trait t : kTraits) {
        props[std::string(to_string(t))] = enum_schema<TraitLevel>();
        required.push_back(to_string(t));
      }
      return {{"type", "object"}, {"additionalProperties", false}, {"required", required}, {"properties", props}};
    }
    case Section::MentalHealthProfile:
      return {{"type", "object"},
              {"additionalProperties", false},
              {"required", {"emotional_awareness", "coping_style", "encouragement_preference"}},
              {"properties",
               {{"emotional_awareness", enum_schema<EmotionalAwareness>()},
                {"coping_style", enum_schema<CopingStyle>()},
                {"encouragement_preference", enum_schema<EncouragementPreference>()}}}};
    case Section::Bevs: {
      json domains = json::array();
      for (auto d : kBevsDomains) domains.push_back(d);
      return {{"type", "object"},
              {"additionalProperties", false},
              {"required", {"startedAt", "completedAt", "currentStep", "domainIndex", "domains", "assessments"}},
              {"properties",
               {{"startedAt", {{"type", "string"}}},
                {"completedAt", {{"type", "string"}}},
                {"currentStep", {{"const", "done"}}},
                {"domainIndex", {{"const", 3}}},
                {"domains", {{"const", domains}}},
                {"assessments",
                 {{"type", "array"},
                  {"minItems", 4},
                  {"maxItems", 4},
                  {"items",
                   {{"type", "object"},
                    {"additionalProperties", false},
                    {"required", {"domain", "value_statement", "score"}},
                    {"properties",
                     {{"domain", enum_schema(kBevsDomains)},
                      {"value_statement", {{"type", "string"}}},
                      {"score", {{"type", "integer"}, {"minimum", 1}, {"maximum", 7}}}}}}}}}}}};
    }
    case Section::MentalHealthGoals:
      return {{"type", "array"},
              {"minItems", 1},
              {"items", goals == GoalWriteMode::CreateOnly ? goal_create_schema() : goal_update_schema()}};
  }
  return json::object();
}

}  // namespace

PhaseWrites permitted_writes(Phase phase) {
  switch (phase) {
    case Phase::Introduction:
      return {{Section::Demographic, Section::PersonalityTraits, Section::MentalHealthProfile},
              GoalWriteMode::None};
    case Phase::ValuesCheckIn: return {{Section::Bevs}, GoalWriteMode::None};
    case Phase::GoalSetting: return {{Section::MentalHealthGoals}, GoalWriteMode::CreateOnly};
    case Phase::ActiveCoaching: return {{Section::MentalHealthGoals}, GoalWriteMode::UpdateOnly};
  }
  return {};
}

bool is_section_permitted(Phase phase, Section section) {
  const auto writes = permitted_writes(phase);
  return std::find(writes.sections.begin(), writes.sections.end(), section) != writes.sections.end();
}

void to_json(json& j, const ToolCallPatch& p) {
  j = json{{"phase_tag", to_string(p.phase_tag)}, {"section", to_string(p.section)}, {"payload", p.payload}};
}

void from_json(const json& j, ToolCallPatch& p) {
  auto phase = parse_enum<Phase>(j.at("phase_tag").get<std::string>());
  auto section = parse_enum<Section>(j.at("section").get<std::string>());
  if (!phase || !section) throw GrowError(ErrorCode::SchemaViolation, "bad patch header");
  p.phase_tag = *phase;
  p.section = *section;
  p.payload = j.at("payload");
}

std::vector<ToolCallPatch> split_tool_payload(Phase phase, const json& arguments) {
  require_object(arguments, "saveProfile");
  if (arguments.empty()) violation("saveProfile", "no sections given");
  std::vector<ToolCallPatch> patches;
  for (const auto& [key, value] : arguments.items()) {
    auto section = parse_enum<Section>(key);
    if (!section) violation("saveProfile", "unknown section '" + key + "'");
    patches.push_back({phase, *section, value});
  }
  return patches;
}

json tool_schema_for(Phase phase) {
  const auto writes = permitted_writes(phase);
  json props = json::object();
  for (Section s : writes.sections) props[std::string(to_string(s))] = section_schema(s, writes.goals);
  return {{"type", "object"}, {"additionalProperties", false}, {"properties", props}};
}

IntroductionWrite parse_introduction(std::span<const ToolCallPatch> patches) {
  IntroductionWrite out;
  std::set<Section> seen;
  for (const auto& patch : patches) {
    if (!seen.insert(patch.section).second) violation(std::string(to_string(patch.section)), "given twice");
    const std::string where(to_string(patch.section));
    const json& j = require_object(patch.payload, where);
    switch (patch.section) {
      case Section::Demographic:
        check_keys(j, {"name", "college_year", "major"}, where);
        out.display_name = opt_text(j, "name", where);
        out.demographic.college_year = opt_text(j, "college_year", where);
        out.demographic.major = opt_text(j, "major", where);
        break;
      case Section::PersonalityTraits:
        for (const auto& [key, value] : j.items()) {
          auto trait = parse_enum<Trait>(key);
          if (!trait) violation(where, "unknown trait '" + key + "'");
          json wrapper = {{"level", value}};
          out.traits[*trait] = *opt_enum<TraitLevel>(wrapper, "level", where + "." + key);
        }
        break;
      case Section::MentalHealthProfile:
        check_keys(j, {"emotional_awareness", "coping_style", "encouragement_preference"}, where);
        out.mental_health.emotional_awareness = opt_enum<EmotionalAwareness>(j, "emotional_awareness", where);
        out.mental_health.coping_style = opt_enum<CopingStyle>(j, "coping_style", where);
        out.mental_health.encouragement_preference =
            opt_enum<EncouragementPreference>(j, "encouragement_preference", where);
        break;
      default:
        violation(where, "not an introduction section");
    }
  }

  UserProfile probe;
  probe.demographic = out.demographic;
  probe.personality_traits = out.traits;
  probe.mental_health_profile = out.mental_health;
  const auto missing = intro_missing_fields(probe);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    violation("introduction", "incomplete payload, missing " + list);
  }
  return out;
}

BevsRecord parse_bevs_save(const json& payload) {
  const std::string where = "bevs";
  require_object(payload, where);
  check_keys(payload, {"startedAt", "completedAt", "currentStep", "domainIndex", "domains", "assessments"}, where);

  BevsRecord record;
  try {
    record.started_at = parse_timestamp(req_text(payload, "startedAt", where));
    record.completed_at = parse_timestamp(req_text(payload, "completedAt", where));
  } catch (const GrowError& e) {
    if (e.code() == ErrorCode::SchemaViolation) throw;
    violation(where, e.what());
  }
  if (*record.completed_at < record.started_at) violation(where, "completedAt precedes startedAt");
  if (opt_enum<BevsStep>(payload, "currentStep", where) != BevsStep::Done) {
    violation(where + ".currentStep", "a saved values check-in must be done");
  }
  record.current_step = BevsStep::Done;
  record.domain_index = static_cast<int>(req_int(payload, "domainIndex", where, 3, 3));

  if (payload.contains("domains")) {
    const json& d = payload.at("domains");
    if (!d.is_array() || d.size() != kBevsDomains.size()) violation(where + ".domains", "must list the four domains");
    for (std::size_t i = 0; i < kBevsDomains.size(); ++i) {
      if (!d[i].is_string() || d[i].get<std::string>() != kBevsDomains[i]) {
        violation(where + ".domains", "must list the four domains in order");
      }
    }
  }

  if (!payload.contains("assessments") || !payload.at("assessments").is_array()) {
    violation(where + ".assessments", "is required");
  }
  const json& items = payload.at("assessments");
  if (items.size() != kBevsDomains.size()) violation(where + ".assessments", "expected exactly 4 entries");
  std::set<std::string> covered;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string item_where = where + ".assessments[" + std::to_string(i) + "]";
    const json& a = require_object(items[i], item_where);
    check_keys(a, {"domain", "value_statement", "score"}, item_where);
    BevsAssessment assessment;
    assessment.domain = req_text(a, "domain", item_where);
    if (std::find(kBevsDomains.begin(), kBevsDomains.end(), assessment.domain) == kBevsDomains.end()) {
      violation(item_where + ".domain", "unknown domain '" + assessment.domain + "'");
    }
    if (!covered.insert(assessment.domain).second) violation(item_where + ".domain", "domain repeated");
    assessment.value_statement = req_text(a, "value_statement", item_where);
    assessment.score = static_cast<int>(req_int(a, "score", item_where, 1, 7));
    record.assessments.push_back(std::move(assessment));
  }
  return record;
}

std::vector<GoalCreate> parse_goal_creates(const json& payload) {
  const std::string where = "mental_health_goals";
  if (!payload.is_array() || payload.empty()) violation(where, "expected a non-empty array");
  std::vector<GoalCreate> out;
  for (std::size_t i = 0; i < payload.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const json& j = require_object(payload[i], w);
    check_keys(j, {"goal_id", "description", "measures", "timeframe", "steps", "obstacles", "completed",
                   "progress", "status", "lastUpdated"},
               w);
    GoalCreate create;
    create.goal_id = opt_text(j, "goal_id", w);
    if (create.goal_id && !valid_goal_id(*create.goal_id)) violation(w + ".goal_id", "malformed id");
    Goal& g = create.goal;
    g.description = req_text(j, "description", w);

    if (!j.contains("measures")) violation(w + ".measures", "is required");
    const json& m = require_object(j.at("measures"), w + ".measures");
    check_keys(m, {"unit", "weekly_target", "completed_units"}, w + ".measures");
    const std::string unit = req_text(m, "unit", w + ".measures");
    if (unit == "frequency" || unit == "count") {
      g.measures.unit = MeasureUnit::Count;
    } else if (unit == "minutes") {
      g.measures.unit = MeasureUnit::Minutes;
    } else {
      violation(w + ".measures.unit", "unknown unit '" + unit + "'");
    }
    g.measures.weekly_target = static_cast<std::uint32_t>(req_int(m, "weekly_target", w + ".measures", 1, 100000));
    if (opt_int(m, "completed_units", w + ".measures", 0, 0).value_or(0) != 0) {
      violation(w + ".measures.completed_units", "a new goal starts at zero");
    }

    if (!j.contains("timeframe")) violation(w + ".timeframe", "is required");
    const json& t = require_object(j.at("timeframe"), w + ".timeframe");
    check_keys(t, {"start_date", "duration_days"}, w + ".timeframe");
    try {
      g.timeframe.start_date = parse_date(req_text(t, "start_date", w + ".timeframe"));
    } catch (const GrowError& e) {
      if (e.code() == ErrorCode::SchemaViolation) throw;
      violation(w + ".timeframe.start_date", e.what());
    }
    g.timeframe.duration_days = static_cast<std::uint32_t>(req_int(t, "duration_days", w + ".timeframe", 1, 366));

    if (!j.contains("steps")) violation(w + ".steps", "is required");
    g.steps = text_list(j.at("steps"), w + ".steps", 1, 3);
    if (j.contains("obstacles")) g.obstacles = text_list(j.at("obstacles"), w + ".obstacles", 0, 10);

    if (opt_bool(j, "completed", w).value_or(false)) violation(w + ".completed", "a new goal must not be completed");
    if (opt_int(j, "progress", w, 0, 100).value_or(0) != 0) violation(w + ".progress", "a new goal starts at 0");
    if (opt_enum<GoalStatus>(j, "status", w).value_or(GoalStatus::Active) != GoalStatus::Active) {
      violation(w + ".status", "a new goal must be active");
    }
    g.progress = 0;
    g.status = GoalStatus::Active;
    out.push_back(std::move(create));
  }
  return out;
}

std::vector<GoalUpdate> parse_goal_updates(const json& payload) {
  const std::string where = "mental_health_goals";
  if (!payload.is_array() || payload.empty()) violation(where, "expected a non-empty array");
  std::vector<GoalUpdate> out;
  for (std::size_t i = 0; i < payload.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const json& j = require_object(payload[i], w);
    check_keys(j, {"goal_id", "description", "progress", "completed", "status", "completed_units", "measures",
                   "timeframe", "steps", "obstacles", "lastUpdated"},
               w);
    GoalUpdate u;
    u.goal_id = req_text(j, "goal_id", w);
    u.description = opt_text(j, "description", w);
    if (auto p = opt_int(j, "progress", w, 0, 100)) u.progress = static_cast<int>(*p);
    u.completed = opt_bool(j, "completed", w);
    u.status = opt_enum<GoalStatus>(j, "status", w);
    if (u.completed && u.status && (*u.completed != (*u.status == GoalStatus::Completed))) {
      violation(w, "completed and status disagree");
    }
    if (auto n = opt_int(j, "completed_units", w, 0, 100000)) u.completed_units = static_cast<std::uint32_t>(*n);
    if (j.contains("measures")) {
      const json& m = require_object(j.at("measures"), w + ".measures");
      check_keys(m, {"weekly_target", "completed_units"}, w + ".measures");
      if (auto n = opt_int(m, "weekly_target", w + ".measures", 1, 100000)) {
        u.weekly_target = static_cast<std::uint32_t>(*n);
      }
      if (auto n = opt_int(m, "completed_units", w + ".measures", 0, 100000)) {
        if (u.completed_units && *u.completed_units != *n) violation(w, "completed_units given twice");
        u.completed_units = static_cast<std::uint32_t>(*n);
      }
    }
    if (j.contains("timeframe")) {
      const json& t = require_object(j.at("timeframe"), w + ".timeframe");
      check_keys(t, {"duration_days"}, w + ".timeframe");
      if (auto n = opt_int(t, "duration_days", w + ".timeframe", 1, 366)) {
        u.duration_days = static_cast<std::uint32_t>(*n);
      }
    }
    if (j.contains("steps")) u.steps = text_list(j.at("steps"), w + ".steps", 1, 3);
    if (j.contains("obstacles")) u.obstacles = text_list(j.at("obstacles"), w + ".obstacles", 0, 10);
    // lastUpdated is accepted for compatibility; the store stamps its own time.
    if (j.contains("lastUpdated") && !j.at("lastUpdated").is_string()) {
      violation(w + ".lastUpdated", "expected a string");
    }
    out.push_back(std::move(u));
  }
  return out;
}

bool apply_goal_update(Goal& goal, const GoalUpdate& update, Timestamp now) {
  const Goal before = goal;
  if (update.description) goal.description = *update.description;
  if (update.steps) goal.steps = *update.steps;
  if (update.obstacles) goal.obstacles = *update.obstacles;
  if (update.duration_days) goal.timeframe.duration_days = *update.duration_days;
  if (update.weekly_target) goal.measures.weekly_target = *update.weekly_target;
  if (update.completed_units) goal.measures.completed_units = *update.completed_units;

  // Countable measures drive progress; an explicit percentage is used only
  // when no count arrived.
  if (update.completed_units || update.weekly_target) {
    goal.progress = compute_goal_progress(goal.measures.completed_units, goal.measures.weekly_target);
  } else if (update.progress) {
    goal.progress = *update.progress;
  }

  if (update.completed == true || update.status == GoalStatus::Completed) {
    goal.status = GoalStatus::Completed;
  } else if (update.status) {
    goal.status = *update.status;
  } else if (update.completed == false && goal.status == GoalStatus::Completed) {
    goal.status = GoalStatus::Active;
  }
  if (goal.status == GoalStatus::Completed) goal.progress = 100;

  if (goal == before) return false;
  goal.last_updated = now;
  return true;
}

}  // namespace grow
