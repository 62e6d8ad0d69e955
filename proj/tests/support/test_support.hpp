#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "grow/conversation.hpp"
#include "grow/gateway.hpp"
#include "grow/time.hpp"

namespace grow::fx {

using json = nlohmann::json;

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(GROW_FIXTURE_DIR) / name;
}

inline Timestamp at(const char* text) { return parse_timestamp(text); }
inline Date day(const char* text) { return parse_date(text); }

// Settable clock shared by engine and service under test.
struct ManualClock {
  Timestamp now = parse_timestamp("2026-03-02T18:00:00Z");
  std::function<Timestamp()> fn() {
    return [this] { return now; };
  }
};

inline json intro_payload(const std::string& name = "Rowan") {
  json j = {{"demographic", {{"college_year", "senior"}, {"major", "Computer Science"}}},
            {"personality_traits",
             {{"Openness", "high"},
              {"Conscientiousness", "low"},
              {"Extraversion", "moderate"},
              {"Agreeableness", "high"},
              {"Neuroticism", "high"}}},
            {"mental_health_profile",
             {{"emotional_awareness", "high"}, {"coping_style", "mixed"}, {"encouragement_preference", "progress"}}}};
  if (!name.empty()) j["demographic"]["name"] = name;
  return j;
}

inline json goal_create(const std::string& description = "Play guitar for 10 minutes a day",
                        int weekly_target = 7, int duration = 7, const std::string& start = "2026-03-02") {
  return {{"description", description},
          {"measures", {{"unit", "count"}, {"weekly_target", weekly_target}}},
          {"timeframe", {{"start_date", start}, {"duration_days", duration}}},
          {"steps", {"Keep the guitar next to the bed"}},
          {"obstacles", {"Busy days"}},
          {"completed", false},
          {"progress", 0}};
}

inline json bevs_done_payload() {
  json a = json::array();
  int score = 3;
  for (auto d : kBevsDomains) a.push_back({{"domain", std::string(d)}, {"value_statement", "Something I care about"}, {"score", score++}});
  return {{"currentStep", "done"}, {"domainIndex", 3}, {"assessments", a}, {"startedAt", "2026-03-02T18:00:00Z"},
          {"completedAt", "2026-03-02T18:10:00Z"}};
}

// Gateway that replays one canned result, or throws when |fail| is set.
class CannedGateway : public ModelGateway {
 public:
  LlmResult result;
  bool fail = false;
  std::size_t calls = 0;
  PromptBundle last;

  LlmResult complete(const PromptBundle& bundle, const LlmParams&) override {
    ++calls;
    last = bundle;
    if (fail) throw GrowError(ErrorCode::GatewayUnavailable, "down");
    return result;
  }
};

}  // namespace grow::fx
