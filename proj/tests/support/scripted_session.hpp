#pragma once

// Drives the scripted coaching fixture through the engine and records the
// stored profile at the end of each phase.

#include <string>
#include <vector>

#include "grow/conversation.hpp"
#include "grow/store.hpp"
#include "support/test_support.hpp"

namespace grow::fx {

struct PhaseScript {
  Phase phase;
  std::vector<std::string> user_turns;
};

inline const std::vector<PhaseScript>& session_turns() {
  static const std::vector<PhaseScript> turns = {
      {Phase::Introduction,
       {"Hi! Doing pretty well today.", "I'm Rowan, a senior in Computer Science.", "I love trying new things.",
        "Honestly it's a struggle, I'm all over the place.", "Somewhere in the middle I guess.",
        "I really care about getting along with people.", "A lot lately, with finals coming up.",
        "I usually play music or go for a walk, sometimes I just avoid things.", "I notice them pretty quickly.",
        "Seeing my progress keeps me going."}},
      {Phase::ValuesCheckIn,
       {"Sure, let's do it.", "Doing well in my classes and actually learning.", "Maybe a 3 honestly.",
        "Making time for the people I care about.", "5", "Taking better care of my sleep and stress.", "About a 2.",
        "Keeping up with music.", "I'd give it a 4.", "Yes, save it."}},
      {Phase::GoalSetting,
       {"Stress relief feels most important.", "I could play my guitar.", "About 10 minutes.", "Every day.",
        "Keeping the guitar next to my bed.", "Playing calms me down when I'm stressed.", "Yes, that feels realistic.",
        "No, that's all for now."}},
      {Phase::ActiveCoaching,
       {"I played my guitar three times this week.", "It was hard to start on busy days, I felt guilty.",
        "I think I'll keep the goal but start with 5 minutes.", "Thanks, that helps."}},
  };
  return turns;
}

struct SessionRun {
  std::vector<UserProfile> after_phase;  // one per phase, in order
  std::vector<Phase> phase_at_end;
  std::vector<EngineOutput> outputs;     // greeting first
  std::vector<std::string> incidents;
  SessionState final_state;
};

// |store| must not know |user_id| yet.
inline SessionRun run_scripted_session(ProfileStore& store, ModelGateway& gateway, ManualClock& clock,
                                       const std::string& user_id = "user-e2e") {
  EngineConfig config;
  config.clock = clock.fn();
  ConversationEngine engine(store, gateway, config);
  store.register_user(user_id);
  SessionRun run;
  SessionState s = engine.start_session(user_id);
  run.outputs.push_back(engine.greet(s));
  for (const auto& phase : session_turns()) {
    for (const auto& text : phase.user_turns) {
      clock.now += std::chrono::minutes{1};
      run.outputs.push_back(engine.advance(s, text));
      for (const auto& i : run.outputs.back().incidents) run.incidents.push_back(i);
    }
    run.after_phase.push_back(store.load_profile(user_id));
    run.phase_at_end.push_back(s.phase);
  }
  run.final_state = s;
  return run;
}

}  // namespace grow::fx
