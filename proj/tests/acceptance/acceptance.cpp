// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "grow/conversation.hpp"
#include "grow/metrics.hpp"
#include "grow/pii.hpp"
#include "grow/scheduler.hpp"
#include "grow/store.hpp"
#include "support/oracles.hpp"
#include "support/random_cases.hpp"
#include "support/scripted_session.hpp"
#include "support/test_support.hpp"

using namespace grow;

namespace {

// Pinned limits.
constexpr auto kSessionTimeLimit = std::chrono::milliseconds{1000};
constexpr auto kSchedulerTimeLimit = std::chrono::milliseconds{10000};
constexpr int kAdversarialCases = 200;
constexpr int kSchedulerCases = 1000;
constexpr int kConsistencyTraces = 500;
constexpr int kTraceDays = 30;
constexpr int kPrivacyTurns = 50;
constexpr int kMarkerCases = 2000;

struct Check {
  bool ok = true;
  std::ostringstream why;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) why << what;
    ok = ok && cond;
  }
};

using Clock = std::chrono::steady_clock;

long long ms_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

// --- 1. scripted session ------------------------------------------------------

std::string end_to_end(Check& c) {
  fx::ManualClock clock;
  ProfileStore store;
  ScriptedGateway gateway(load_script(fx::fixture("coaching_session.json")));
  const auto t0 = Clock::now();
  const auto run = fx::run_scripted_session(store, gateway, clock);
  const auto elapsed = ms_since(t0);

  c.require(run.after_phase.size() == 4, "session did not cover four phases");
  if (!c.ok) return "";
  const auto& intro = run.after_phase[0];
  c.require(intro.intro_complete && intro_missing_fields(intro).empty(), "introduction incomplete");
  const auto& bevs = run.after_phase[1].bevs;
  c.require(bevs && bevs->done() && bevs->assessments.size() == 4, "values check-in not saved with 4 assessments");
  if (bevs && !bevs->assessments.empty()) {
    c.require(bevs->assessments[0].domain == "Work/Studies" && bevs->assessments[0].score == 3,
              "Work/Studies score is not 3");
  }
  const auto& goals = run.after_phase[2].mental_health_goals;
  c.require(goals.size() == 1 && goals[0].progress == 0 && goals[0].status != GoalStatus::Completed,
            "goal setting did not create one fresh goal");
  const auto& after = run.after_phase[3].mental_health_goals;
  c.require(after.size() == 1 && after[0].progress == 43, "check-in did not yield progress 43");
  c.require(run.phase_at_end[3] == Phase::ActiveCoaching, "session did not end in active coaching");
  c.require(elapsed < kSessionTimeLimit.count(), "session took " + std::to_string(elapsed) + " ms");
  return std::to_string(elapsed) + " ms";
}

// --- 2. adversarial writes -----------------------------------------------------

std::optional<ErrorCode> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const GrowError& e) {
    return e.code();
  }
  return std::nullopt;
}

void seed_to(ProfileStore& store, const std::string& user, Phase phase, Timestamp t) {
  store.register_user(user);
  if (phase == Phase::Introduction) return;
  store.save_profile(user, split_tool_payload(Phase::Introduction, fx::intro_payload()), t);
  if (phase == Phase::ValuesCheckIn) return;
  store.save_profile(user, split_tool_payload(Phase::ValuesCheckIn, {{"bevs", fx::bevs_done_payload()}}), t);
  if (phase == Phase::GoalSetting) return;
  store.save_profile(user, split_tool_payload(Phase::GoalSetting, {{"mental_health_goals", json::array({fx::goal_create()})}}), t);
}

json section_payload(Section s) {
  switch (s) {
    case Section::Demographic:
      return fx::intro_payload().at("demographic");
    case Section::PersonalityTraits:
      return fx::intro_payload().at("personality_traits");
    case Section::MentalHealthProfile:
      return fx::intro_payload().at("mental_health_profile");
    case Section::Bevs:
      return fx::bevs_done_payload();
    case Section::MentalHealthGoals:
      return json::array({fx::goal_create()});
  }
  return nullptr;
}

std::string adversarial(Check& c) {
  std::mt19937 rng(7);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const Timestamp t = fx::at("2026-03-02T18:00:00Z");
  const std::vector<std::function<void(json&)>> goal_breakers = {
      [](json& g) { g["measures"]["weekly_target"] = 0; },
      [](json& g) { g["measures"]["unit"] = "hours"; },
      [](json& g) { g["timeframe"]["duration_days"] = 0; },
      [](json& g) { g["timeframe"]["start_date"] = "soon"; },
      [](json& g) { g["steps"] = json::array(); },
      [](json& g) { g.erase("description"); },
      [](json& g) { g["progress"] = 50; },
      [](json& g) { g["mood"] = "great"; },
  };
  const std::vector<json> bad_updates = {
      {{"goal_id", "goal-1"}, {"completed_units", -1}},
      {{"goal_id", "goal-1"}, {"completed_units", "three"}},
      {{"completed_units", 2}},
      {{"goal_id", "goal-1"}, {"description", "new text"}},
      {{"goal_id", "goal-1"}, {"completed", true}, {"status", "active"}},
  };

  int correct = 0, side_effects = 0;
  int per_kind[4] = {0, 0, 0, 0};
  for (int i = 0; i < kAdversarialCases; ++i) {
    const int kind = i % 4;
    ProfileStore store;
    const std::string user = "adv-" + std::to_string(i);
    ErrorCode expected = ErrorCode::SchemaViolation;
    std::vector<ToolCallPatch> patches;
    Phase phase = Phase::Introduction;

    if (kind == 0) {  // wrong phase: a section the phase tag does not permit
      phase = static_cast<Phase>(pick(0, 3));
      std::vector<Section> denied;
      for (int s = 0; s < 5; ++s) {
        if (!is_section_permitted(phase, static_cast<Section>(s))) denied.push_back(static_cast<Section>(s));
      }
      const Section s = denied[pick(0, static_cast<int>(denied.size()) - 1)];
      patches.push_back({phase, s, section_payload(s)});
      expected = ErrorCode::WriteOutOfPhase;
    } else if (kind == 1) {  // wrong schema
      phase = static_cast<Phase>(pick(0, 3));
      if (phase == Phase::Introduction) {
        json p = fx::intro_payload();
        const int v = pick(0, 2);
        if (v == 0) p["personality_traits"]["Openness"] = "extreme";
        if (v == 1) p["mental_health_profile"].erase("coping_style");
        if (v == 2) p["demographic"] = "student";
        patches = split_tool_payload(phase, p);
      } else if (phase == Phase::ValuesCheckIn) {
        json b = fx::bevs_done_payload();
        const int v = pick(0, 2);
        if (v == 0) b["assessments"][0]["score"] = pick(8, 20);
        if (v == 1) b["assessments"].erase(1);
        if (v == 2) b["currentStep"] = "finished";
        patches.push_back({phase, Section::Bevs, b});
      } else if (phase == Phase::GoalSetting) {
        json g = fx::goal_create();
        goal_breakers[pick(0, static_cast<int>(goal_breakers.size()) - 1)](g);
        patches.push_back({phase, Section::MentalHealthGoals, json::array({g})});
      } else {
        patches.push_back({phase, Section::MentalHealthGoals,
                           json::array({bad_updates[pick(0, static_cast<int>(bad_updates.size()) - 1)]})});
      }
      expected = ErrorCode::SchemaViolation;
    } else if (kind == 2) {  // duplicate intro
      phase = Phase::Introduction;
      patches = split_tool_payload(phase, fx::intro_payload(pick(0, 1) ? "Sam" : ""));
      expected = ErrorCode::DuplicateWrite;
    } else {  // unknown goal
      phase = Phase::ActiveCoaching;
      const std::string id = pick(0, 1) ? "goal-" + std::to_string(pick(2, 999)) : "g" + std::to_string(pick(0, 99));
      patches.push_back({phase, Section::MentalHealthGoals,
                         json::array({{{"goal_id", id}, {"completed_units", pick(0, 7)}}})});
      expected = ErrorCode::UnknownGoal;
    }

    // Wrong-schema cases start from a valid state for their phase; the rest
    // from a store that already holds a goal.
    const Phase seed = kind == 2 ? static_cast<Phase>(pick(1, 3)) : kind == 1 ? phase : Phase::ActiveCoaching;
    seed_to(store, user, seed, t);
    const json before = store.dump();
    const auto got = code_of([&] { store.save_profile(user, patches, t + std::chrono::minutes{5}); });
    if (got == expected) {
      ++correct;
      ++per_kind[kind];
    } else if (c.ok) {
      c.require(false, "case " + std::to_string(i) + ": expected " + std::string(to_string(expected)) + " got " +
                           (got ? std::string(to_string(*got)) : std::string("no error")) + " for " + json(patches).dump());
    }
    if (store.dump() != before) ++side_effects;
  }
  c.require(correct == kAdversarialCases, "");
  c.require(side_effects == 0, std::to_string(side_effects) + " cases changed the store");
  std::ostringstream s;
  s << correct << "/" << kAdversarialCases << " correct (phase " << per_kind[0] << ", schema " << per_kind[1]
    << ", duplicate intro " << per_kind[2] << ", unknown goal " << per_kind[3] << "), " << side_effects
    << " side effects";
  return s.str();
}

// --- 3. scheduler ---------------------------------------------------------------

bool overlaps(const CheckinEvent& e, const BusyInterval& b) { return e.start < b.end && b.start < e.start + e.duration; }

std::string scheduler(Check& c) {
  std::mt19937 rng(31337);
  int mismatches = 0, intersections = 0, wrong_count = 0, fallbacks = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < kSchedulerCases; ++i) {
    const auto k = fx::random_schedule_case(rng);
    const auto plan = schedule_goal_checkins(k.goal, k.pref, k.busy, k.options);
    const auto expected = oracle::schedule(k.goal, k.pref, k.busy, k.options);
    bool same = plan.events.size() == expected.size();
    for (std::size_t e = 0; same && e < expected.size(); ++e) {
      same = plan.events[e].kind == expected[e].kind && plan.events[e].start == expected[e].start &&
             plan.events[e].fallback == expected[e].fallback;
    }
    if (!same) ++mismatches;
    for (const auto& e : plan.events) {
      if (e.fallback) {
        ++fallbacks;
        continue;
      }
      for (const auto& b : k.busy) intersections += overlaps(e, b);
    }
    if (k.goal.timeframe.duration_days >= 2 && plan.events.size() != 2) ++wrong_count;
  }
  const auto elapsed = ms_since(t0);
  c.require(mismatches == 0, std::to_string(mismatches) + " plans differ from the enumerator; ");
  c.require(intersections == 0, std::to_string(intersections) + " busy intersections; ");
  c.require(wrong_count == 0, std::to_string(wrong_count) + " multi-day goals without 2 events; ");
  c.require(elapsed < kSchedulerTimeLimit.count(), "took " + std::to_string(elapsed) + " ms");
  return std::to_string(kSchedulerCases) + " cases, " + std::to_string(fallbacks) + " flagged fallbacks, " +
         std::to_string(elapsed) + " ms";
}

// --- 4. consistency -------------------------------------------------------------

std::string consistency(Check& c) {
  std::mt19937 rng(4242);
  const Date origin = fx::day("2026-01-01");
  int mismatches = 0, violations = 0;
  for (int trace = 0; trace < kConsistencyTraces; ++trace) {
    std::vector<Date> checkins;
    const int density = 1 + static_cast<int>(rng() % 5);
    int prev = 0;
    for (int d = 0; d < kTraceDays; ++d) {
      const Date today = origin + std::chrono::days{d};
      const int idle = checkin_consistency(checkins, today);
      if (idle > prev) ++violations;  // a day passing never raises the score
      if (static_cast<int>(rng() % 5) < density) {
        const int n = 1 + static_cast<int>(rng() % 3);
        for (int k = 0; k < n; ++k) checkins.push_back(today);
      }
      const int value = checkin_consistency(checkins, today);
      if (value < idle) ++violations;  // checking in never lowers it
      if (value < 0 || value > 100) ++violations;
      if (value != oracle::consistency(checkins, today, 7)) ++mismatches;
      prev = value;
    }
  }
  c.require(mismatches == 0, std::to_string(mismatches) + " days differ from the recount; ");
  c.require(violations == 0, std::to_string(violations) + " monotonicity violations");
  return std::to_string(kConsistencyTraces) + " traces x " + std::to_string(kTraceDays) + " days";
}

// --- 5. progress table ------------------------------------------------------------

std::string progress_table(Check& c) {
  int cells = 0, wrong = 0;
  for (std::uint32_t t = 1; t <= 10; ++t) {
    int prev = -1;
    for (std::uint32_t done = 0; done <= 20; ++done) {
      const int p = compute_goal_progress(done, t);
      ++cells;
      if (p != oracle::progress(done, t) || p < prev || p > 100) ++wrong;
      prev = p;
    }
  }
  c.require(wrong == 0, std::to_string(wrong) + " cells wrong; ");
  c.require(compute_goal_progress(2, 5) == 40, "(2,5) is not 40; ");
  c.require(compute_goal_progress(3, 7) == 43, "(3,7) is not 43; ");
  c.require(code_of([] { compute_goal_progress(1, 0); }) == ErrorCode::InvalidTarget, "zero target accepted");
  return std::to_string(cells) + " cells";
}

// --- 6. style classifier ------------------------------------------------------------

std::string words(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += i ? " word" : "word";
  return s;
}

std::string style(Check& c) {
  auto fb = [](std::vector<std::string> msgs) { return fallback_style(compute_style_metrics(msgs)); };
  std::vector<std::string> five(5, "fine thanks"), six(6, "fine thanks");
  five[0] += "!";
  six[0] += "!";
  int checks = 0;
  auto expect = [&](bool cond, const std::string& what) {
    ++checks;
    c.require(cond, what + "; ");
  };
  expect(fb({words(12)}).length == MessageLength::Short, "12 words not short");
  expect(fb({words(13)}).length == MessageLength::Long, "13 words not long");
  expect(fb({words(11), words(13)}).length == MessageLength::Short, "average of 12 not short");
  expect(fb(five).emotional_style == EmotionalStyle::Expressive, "rate 0.2 not expressive");
  expect(fb(six).emotional_style == EmotionalStyle::Neutral, "rate 1/6 not neutral");
  expect(fb({"ok :)"}).emotional_style == EmotionalStyle::Expressive, "emoticon not counted");
  expect(fb({words(19) + " 3"}).thinking_style == ThinkingStyle::DataDriven, "ratio 0.05 not data-driven");
  expect(fb({words(20) + " 3"}).thinking_style == ThinkingStyle::ExperienceBased, "ratio 1/21 data-driven");
  expect(fb({words(17) + " I'm gonna yeah"}).tone == Tone::Casual, "rate 0.15 not casual");
  expect(fb({words(18) + " I'm gonna yeah"}).tone == Tone::Formal, "rate 3/21 casual");

  const std::vector<std::string> msgs = {"I'm ok, gonna try 2 more times!", "yeah it's fine"};
  const auto expected = fallback_style(compute_style_metrics(msgs));
  fx::CannedGateway g;
  for (const char* text : {"", "casual", "{\"tone\":\"casual\"}", "[1,2,3]", "{\"tone\": \"casual\", \"length\": ",
                           R"({"tone":"loud","length":"short","emotional_style":"neutral","thinking_style":"data-driven"})",
                           R"({"tone":"casual","length":"short","emotional_style":"neutral","thinking_style":"data-driven","x":1})"}) {
    g.result.text = text;
    const auto a = classify_style(msgs, &g, "[metrics] [transcript]");
    const auto b = classify_style(msgs, &g, "[metrics] [transcript]");
    expect(!a.from_model && a.style == expected && b.style == a.style, std::string("malformed output used: ") + text);
  }
  g.fail = true;
  expect(classify_style(msgs, &g, "[metrics] [transcript]").style == expected, "gateway failure not handled");
  return std::to_string(checks) + " checks";
}

// --- 7. privacy ---------------------------------------------------------------------

// Coach that echoes personal details back and saves them where it can.
class LeakyCoach : public ModelGateway {
 public:
  explicit LeakyCoach(std::mt19937& rng) : rng_(rng) {}

  LlmResult complete(const PromptBundle& b, const LlmParams&) override {
    LlmResult r;
    const std::string contact = " Should I write to rowan.k" + std::to_string(rng_() % 100) +
                                "@example.com or call 555-201-" + std::to_string(1000 + rng_() % 9000) + "?";
    r.text = "Thanks, Rowan." + contact;
    switch (b.phase) {
      case Phase::Introduction:
        if (b.phase_turn >= 2) {
          json p = fx::intro_payload("Rowan");
          p["demographic"]["major"] = "CS, reach Rowan at rowan@uni.edu";
          r.tool_calls.push_back({"saveProfile", p});
        }
        break;
      case Phase::GoalSetting:
        if (b.phase_turn == 1) {
          r.tool_calls.push_back({"saveProfile",
                                  {{"mental_health_goals",
                                    json::array({fx::goal_create("Call Rowan's mum on +44 20 7946 0958 every day")})}}});
        }
        if (b.phase_turn == 2) r.text += " [ONGOING_PHASE]";
        break;
      case Phase::ActiveCoaching:
        r.tool_calls.push_back({"saveProfile",
                                {{"mental_health_goals",
                                  json::array({{{"goal_id", "goal-1"},
                                                {"completed_units", static_cast<int>(rng_() % 8)},
                                                {"steps", {"Text rowan@uni.edu a reminder", "Ask ROWAN to join"}}}})}}});
        break;
      default:
        break;
    }
    return r;
  }

 private:
  std::mt19937& rng_;
};

std::string privacy(Check& c) {
  std::mt19937 rng(2718);
  fx::ManualClock clock;
  ProfileStore store;
  LeakyCoach coach(rng);
  EngineConfig config;
  config.clock = clock.fn();
  ConversationEngine engine(store, coach, config);
  const std::string user = "user-privacy";
  store.register_user(user);
  SessionState s = engine.start_session(user, "Rowan");
  engine.greet(s);

  auto email = [&] { return "rowan." + std::to_string(rng() % 1000) + "@mail" + std::to_string(rng() % 9) + ".com"; };
  auto phone = [&] {
    const std::string formats[] = {"(617) 555-0", "+1 617 555 0", "617.555.0", "07700 9000"};
    return formats[rng() % 4] + std::to_string(100 + rng() % 900);
  };
  const std::vector<std::string> values_turns = {
      "Sure.",
      "Studying with my group, mail me at " + email(),
      "4",
      "Calling home on " + phone() + " every week, Rowan here",
      "5",
      "Sleep more, my coach Rowan says",
      "3",
      "Music with friends, text " + phone(),
      "6",
      "Yes"};
  std::vector<std::string> turns = {"Hi, I'm Rowan, email " + email(), "My number is " + phone(),
                                    "rowan again: " + email()};
  turns.insert(turns.end(), values_turns.begin(), values_turns.end());
  while (static_cast<int>(turns.size()) < kPrivacyTurns) {
    switch (rng() % 3) {
      case 0:
        turns.push_back("Rowan here, you can reach me at " + email());
        break;
      case 1:
        turns.push_back("Call me on " + phone() + " after class, ROWAN");
        break;
      default:
        turns.push_back("I practiced " + std::to_string(rng() % 7) + " times, text " + phone() + " or " + email());
    }
  }
  for (const auto& t : turns) {
    clock.now += std::chrono::minutes{3};
    engine.advance(s, t);
  }
  store.rescrub_transcript(user, "Rowan");

  const json dump = store.dump();
  const auto hits = find_pii_in_dump(dump);
  std::string text = dump.dump();
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char ch) { return std::tolower(ch); });
  std::size_t names = 0;
  std::string first_name_hit;
  for (auto pos = text.find("rowan"); pos != std::string::npos; pos = text.find("rowan", pos + 1)) {
    if (names++ == 0) first_name_hit = text.substr(pos < 60 ? 0 : pos - 60, 120);
  }
  const auto profile = store.load_profile(user);
  c.require(s.phase == Phase::ActiveCoaching && profile.mental_health_goals.size() == 1,
            "session did not reach active coaching with a goal; ");
  c.require(hits.empty(), std::to_string(hits.size()) + " pattern matches, first: " + (hits.empty() ? "" : hits[0]) + "; ");
  c.require(names == 0, std::to_string(names) + " name occurrences, first: " + first_name_hit);
  return std::to_string(turns.size()) + " turns, " + std::to_string(store.transcript(user).size()) +
         " stored turns, " + std::to_string(hits.size()) + " matches, " + std::to_string(names) + " names";
}

// --- 8. marker fuzz -------------------------------------------------------------------

class FuzzCoach : public ModelGateway {
 public:
  std::string text;
  LlmResult complete(const PromptBundle&, const LlmParams&) override { return {text, {}}; }
};

std::string markers(Check& c) {
  std::mt19937 rng(16180);
  const std::vector<std::string> pieces = {"Great work", " ", "[ONGOING_PHASE]", "[GOAL_SETTING_PHASE]", "!", ",",
                                           "\n", "[ONGOING_", "PHASE]", "[[GOAL_SETTING_PHASE]]", "[ongoing_phase]",
                                           "Let's keep going.", "[ONGOING_[GOAL_SETTING_PHASE]PHASE]"};
  int leaks = 0, illegal = 0, transitions = 0;
  for (int i = 0; i < kMarkerCases; ++i) {
    std::string text;
    const int n = 1 + static_cast<int>(rng() % 10);
    for (int k = 0; k < n; ++k) text += pieces[rng() % pieces.size()];
    const Phase phase = static_cast<Phase>(rng() % 4);

    const auto parsed = parse_markers(text, phase);
    if (parsed.clean_text.find("[ONGOING_PHASE]") != std::string::npos ||
        parsed.clean_text.find("[GOAL_SETTING_PHASE]") != std::string::npos)
      ++leaks;
    if (parsed.transition && !is_legal_transition(phase, *parsed.transition)) ++illegal;

    // Through the engine, from a stored state whose resume phase is |phase|.
    fx::ManualClock clock;
    ProfileStore store;
    FuzzCoach coach;
    EngineConfig config;
    config.clock = clock.fn();
    ConversationEngine engine(store, coach, config);
    seed_to(store, "u", phase, clock.now);
    SessionState s = engine.start_session("u");
    coach.text = text;
    const Phase before = s.phase;
    const auto out = engine.advance(s, "Okay.");
    if (out.reply_text.find("[ONGOING_PHASE]") != std::string::npos ||
        out.reply_text.find("[GOAL_SETTING_PHASE]") != std::string::npos)
      ++leaks;
    if (s.phase != before) {
      ++transitions;
      if (!is_legal_transition(before, s.phase)) ++illegal;
    }
  }
  c.require(leaks == 0, std::to_string(leaks) + " leaked markers; ");
  c.require(illegal == 0, std::to_string(illegal) + " illegal transitions");
  return std::to_string(kMarkerCases) + " cases, " + std::to_string(transitions) + " engine transitions";
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::off);
  struct Criterion {
    const char* name;
    std::string (*run)(Check&);
  };
  const Criterion criteria[] = {
      {"scripted-session", end_to_end},    {"adversarial-writes", adversarial}, {"scheduler-oracle", scheduler},
      {"consistency-traces", consistency}, {"progress-table", progress_table},  {"style-classifier", style},
      {"privacy-scan", privacy},           {"marker-fuzz", markers},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    std::string detail;
    try {
      detail = cr.run(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("threw: ") + e.what());
    }
    if (!check.ok) ++failed;
    std::printf("%s %s: %s\n", check.ok ? "PASS" : "FAIL", cr.name, check.ok ? detail.c_str() : check.why.str().c_str());
  }
  return failed == 0 ? 0 : 1;
}
