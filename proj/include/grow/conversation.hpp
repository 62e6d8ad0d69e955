#pragma once

// The phase state machine: prompt assembly, marker parsing, the values
// check-in step machine, the distress guard and the per-turn driver.

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grow/domain.hpp"
#include "grow/error.hpp"
#include "grow/gateway.hpp"
#include "grow/profile_schema.hpp"
#include "grow/store.hpp"

namespace grow {

inline constexpr std::string_view kOngoingMarker = "[ONGOING_PHASE]";
inline constexpr std::string_view kGoalSettingMarker = "[GOAL_SETTING_PHASE]";

struct SessionState {
  std::string user_id;
  Phase phase = Phase::Introduction;
  std::vector<ChatTurn> history;
  // Engine-owned values check-in progress while in ValuesCheckIn.
  std::optional<BevsRecord> pending_bevs;
  std::size_t turn_count = 0;
  // Model calls made since entering the current phase.
  std::size_t phase_turn = 0;
  // Transient; held only in memory for the life of the session.
  std::optional<std::string> display_name;
  // Set on entry to ActiveCoaching from GoalSetting, cleared after one turn.
  bool arrived_from_goal_setting = false;
};

struct PatchOutcome {
  std::vector<Section> sections;
  bool accepted = false;
  std::optional<ErrorCode> error;
  std::string detail;
};

struct EngineOutput {
  std::string reply_text;
  std::optional<Phase> transition;
  std::vector<PatchOutcome> applied_patches;
  bool resource_footer_attached = false;
  // Rejections and discarded markers, for logging. Never shown to the user.
  std::vector<std::string> incidents;
};

// ---------------------------------------------------------------------------
// Markers

struct MarkerParse {
  std::string clean_text;
  std::optional<Phase> transition;
  // Set when the first marker is not a legal edge from |current|.
  bool illegal = false;
};

// Removes every recognized marker. The first marker found decides the
// transition; an illegal one is reported and discarded.
MarkerParse parse_markers(std::string_view model_text, Phase current);

// ---------------------------------------------------------------------------
// Values check-in

struct BevsStepResult {
  BevsRecord record;
  std::string directive;
  // ScoreOutOfRange when a score reply was rejected.
  std::optional<ErrorCode> error;
};

// Pulls a single score out of a reply such as "I would say a 3." Digits and
// the words one..seven are understood. Throws ScoreOutOfRange.
int extract_bevs_score(std::string_view user_text);

// Advances |record| by one user reply. Precondition: not done.
BevsStepResult bevs_step(const BevsRecord& record, std::string_view user_text, Timestamp now);

// Directive for the coach's next message at the record's current step.
std::string bevs_directive(const BevsRecord& record);

// ---------------------------------------------------------------------------
// Distress guard

// One phrase per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> parse_lexicon(std::string_view text);
std::vector<std::string> load_lexicon(const std::filesystem::path& path);

// Directive to add to the prompt when |user_text| contains a lexicon phrase
// (case-insensitive). Nothing is scored or stored.
std::optional<std::string> distress_guard(std::string_view user_text, std::span<const std::string> lexicon);

inline constexpr std::string_view kResourceFooter =
    "If things feel heavy right now, please reach out to someone who can help. The Support Resources "
    "tab lists counseling and crisis lines you can contact today.";

// ---------------------------------------------------------------------------
// Prompts

struct PromptTemplates {
  std::string introduction;
  std::string values_checkin;
  std::string goal_setting;
  std::string active_coaching;
  std::string style_classifier;
  std::string themes;

  static PromptTemplates defaults();
  // Any of introduction.txt, values_checkin.txt, goal_setting.txt,
  // active_coaching.txt, style_classifier.txt, themes.txt in |dir| replaces
  // the built-in text.
  static PromptTemplates load(const std::filesystem::path& dir);

  const std::string& for_phase(Phase phase) const;
};

// Few-shot exemplars that set the coaching voice for each phase.
std::vector<PromptMessage> few_shot_examples(Phase phase);

// Replaces every "[key]" with its value. Unknown keys are left as they are.
std::string substitute(std::string_view text, const std::map<std::string, std::string>& values);

// "User: ..." / "Coach: ..." lines for the last |window| turns.
std::string render_history(std::span<const ChatTurn> history, std::size_t window);

struct PromptInputs {
  Phase phase = Phase::Introduction;
  std::size_t phase_turn = 0;
  const UserProfile* profile = nullptr;
  std::span<const ChatTurn> history;
  std::size_t history_window = 20;
  CoachPersona persona;
  std::optional<std::string> display_name;
  const BevsRecord* bevs = nullptr;
  std::vector<std::string> directives;
  std::string user_text;
};

PromptBundle build_prompt(const PromptInputs& in, const PromptTemplates& templates);

// ---------------------------------------------------------------------------
// Engine

struct EngineConfig {
  std::size_t history_window = 20;
  LlmParams params;
  std::vector<std::string> lexicon;
  PromptTemplates templates = PromptTemplates::defaults();
  std::function<Timestamp()> clock;
};

// Phase a returning user resumes in: Introduction until the intro is
// complete, then ValuesCheckIn until the check-in is done, then GoalSetting
// while no goal is active or paused, otherwise ActiveCoaching.
Phase resume_phase(const UserProfile& profile);

class ConversationEngine {
 public:
  ConversationEngine(ProfileStore& store, ModelGateway& gateway, EngineConfig config = {});

  // Throws UserNotFound.
  SessionState start_session(const std::string& user_id,
                             std::optional<std::string> display_name = std::nullopt) const;

  // Opening coach message for the session's phase. No user turn.
  EngineOutput greet(SessionState& session);

  // One user turn. On gateway failure the GrowError propagates and |session|
  // is left exactly as it was. The caller serializes calls per session.
  EngineOutput advance(SessionState& session, std::string_view user_text);

  const EngineConfig& config() const noexcept { return config_; }

 private:
  Timestamp now() const;
  EngineOutput run_turn(SessionState& session, std::optional<std::string_view> user_text);

  ProfileStore& store_;
  ModelGateway& gateway_;
  EngineConfig config_;
};

// Hands out one session per user and serializes work on it.
class SessionRegistry {
 public:
  template <typename Fn>
  auto with_session(const std::string& user_id, const std::function<SessionState()>& create, Fn&& fn) {
    std::shared_ptr<Slot> slot;
    {
      std::lock_guard lock(mutex_);
      auto& s = slots_[user_id];
      if (!s) s = std::make_shared<Slot>();
      slot = s;
    }
    std::lock_guard lock(slot->mutex);
    if (!slot->state) slot->state = create();
    return fn(*slot->state);
  }

  bool has_session(const std::string& user_id) const;
  void drop(const std::string& user_id);

 private:
  struct Slot {
    std::mutex mutex;
    std::optional<SessionState> state;
  };
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
};

}  // namespace grow
