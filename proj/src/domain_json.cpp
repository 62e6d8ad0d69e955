#include "grow/domain_json.hpp"

#include "grow/error.hpp"

namespace grow {
namespace {

template <NamedEnum E>
E enum_at(const json& j, const char* key) {
  const auto text = j.at(key).get<std::string>();
  auto value = parse_enum<E>(text);
  if (!value) {
    throw GrowError(ErrorCode::SchemaViolation,
                    std::string("unknown value '") + text + "' for " + key);
  }
  return *value;
}

template <NamedEnum E>
std::optional<E> optional_enum(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return enum_at<E>(j, key);
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

void to_json(json& j, const Demographic& d) {
  j = json::object();
  if (d.college_year) j["college_year"] = *d.college_year;
  if (d.major) j["major"] = *d.major;
}

void to_json(json& j, const MentalHealthProfile& m) {
  j = json::object();
  if (m.emotional_awareness) j["emotional_awareness"] = to_string(*m.emotional_awareness);
  if (m.coping_style) j["coping_style"] = to_string(*m.coping_style);
  if (m.encouragement_preference) {
    j["encouragement_preference"] = to_string(*m.encouragement_preference);
  }
}

json traits_to_json(const std::map<Trait, TraitLevel>& traits) {
  json j = json::object();
  for (const auto& [trait, level] : traits) j[std::string(to_string(trait))] = to_string(level);
  return j;
}

void to_json(json& j, const Goal& g) {
  j = json{
      {"goal_id", g.goal_id},
      {"description", g.description},
      {"measures",
       {{"unit", to_string(g.measures.unit)},
        {"weekly_target", g.measures.weekly_target},
        {"completed_units", g.measures.completed_units}}},
      {"timeframe",
       {{"start_date", format_date(g.timeframe.start_date)},
        {"duration_days", g.timeframe.duration_days}}},
      {"steps", g.steps},
      {"obstacles", g.obstacles},
      {"progress", g.progress},
      {"status", to_string(g.status)},
      {"completed", g.status == GoalStatus::Completed},
      {"lastUpdated", format_timestamp(g.last_updated)},
  };
}

void from_json(const json& j, Goal& g) {
  g.goal_id = j.at("goal_id").get<std::string>();
  g.description = j.at("description").get<std::string>();
  const auto& m = j.at("measures");
  g.measures.unit = enum_at<MeasureUnit>(m, "unit");
  g.measures.weekly_target = m.at("weekly_target").get<std::uint32_t>();
  g.measures.completed_units = m.at("completed_units").get<std::uint32_t>();
  const auto& t = j.at("timeframe");
  g.timeframe.start_date = parse_date(t.at("start_date").get<std::string>());
  g.timeframe.duration_days = t.at("duration_days").get<std::uint32_t>();
  g.steps = j.at("steps").get<std::vector<std::string>>();
  g.obstacles = j.at("obstacles").get<std::vector<std::string>>();
  g.progress = j.at("progress").get<int>();
  g.status = enum_at<GoalStatus>(j, "status");
  g.last_updated = parse_timestamp(j.at("lastUpdated").get<std::string>());
}

void to_json(json& j, const BevsAssessment& a) {
  j = json{{"domain", a.domain}, {"value_statement", a.value_statement}, {"score", a.score}};
}

void to_json(json& j, const BevsRecord& b) {
  j = json{
      {"startedAt", format_timestamp(b.started_at)},
      {"completedAt", b.completed_at ? json(format_timestamp(*b.completed_at)) : json(nullptr)},
      {"currentStep", to_string(b.current_step)},
      {"domainIndex", b.domain_index},
      {"domains", kBevsDomains},
      {"assessments", b.assessments},
  };
}

void from_json(const json& j, BevsRecord& b) {
  b.started_at = parse_timestamp(j.at("startedAt").get<std::string>());
  if (auto completed = optional_string(j, "completedAt")) {
    b.completed_at = parse_timestamp(*completed);
  } else {
    b.completed_at.reset();
  }
  b.current_step = enum_at<BevsStep>(j, "currentStep");
  b.domain_index = j.at("domainIndex").get<int>();
  b.assessments.clear();
  for (const auto& a : j.at("assessments")) {
    b.assessments.push_back({a.at("domain").get<std::string>(),
                             a.at("value_statement").get<std::string>(), a.at("score").get<int>()});
  }
  b.pending_value.reset();
}

void to_json(json& j, const CommunicationStyle& s) {
  j = json{{"tone", to_string(s.tone)},
           {"length", to_string(s.length)},
           {"emotional_style", to_string(s.emotional_style)},
           {"thinking_style", to_string(s.thinking_style)}};
}

void from_json(const json& j, CommunicationStyle& s) {
  s.tone = enum_at<Tone>(j, "tone");
  s.length = enum_at<MessageLength>(j, "length");
  s.emotional_style = enum_at<EmotionalStyle>(j, "emotional_style");
  s.thinking_style = enum_at<ThinkingStyle>(j, "thinking_style");
}

void to_json(json& j, const UserProfile& p) {
  j = json{
      {"user_id", p.user_id},
      {"demographic", p.demographic},
      {"personality_traits", traits_to_json(p.personality_traits)},
      {"mental_health_profile", p.mental_health_profile},
      {"bevs", p.bevs ? json(*p.bevs) : json(nullptr)},
      {"mental_health_goals", p.mental_health_goals},
      {"communication_style",
       p.communication_style ? json(*p.communication_style) : json(nullptr)},
      {"intro_complete", p.intro_complete},
  };
}

void from_json(const json& j, UserProfile& p) {
  p.user_id = j.at("user_id").get<std::string>();
  const auto& d = j.at("demographic");
  p.demographic.college_year = optional_string(d, "college_year");
  p.demographic.major = optional_string(d, "major");
  p.personality_traits.clear();
  for (const auto& [key, value] : j.at("personality_traits").items()) {
    auto trait = parse_enum<Trait>(key);
    auto level = parse_enum<TraitLevel>(value.get<std::string>());
    if (!trait || !level) throw GrowError(ErrorCode::SchemaViolation, "bad trait entry " + key);
    p.personality_traits[*trait] = *level;
  }
  const auto& m = j.at("mental_health_profile");
  p.mental_health_profile.emotional_awareness = optional_enum<EmotionalAwareness>(m, "emotional_awareness");
  p.mental_health_profile.coping_style = optional_enum<CopingStyle>(m, "coping_style");
  p.mental_health_profile.encouragement_preference =
      optional_enum<EncouragementPreference>(m, "encouragement_preference");
  if (j.contains("bevs") && !j.at("bevs").is_null()) {
    p.bevs = j.at("bevs").get<BevsRecord>();
  } else {
    p.bevs.reset();
  }
  p.mental_health_goals = j.at("mental_health_goals").get<std::vector<Goal>>();
  if (j.contains("communication_style") && !j.at("communication_style").is_null()) {
    p.communication_style = j.at("communication_style").get<CommunicationStyle>();
  } else {
    p.communication_style.reset();
  }
  p.intro_complete = j.at("intro_complete").get<bool>();
}

}  // namespace grow
