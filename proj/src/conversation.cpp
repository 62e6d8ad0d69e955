#include "grow/conversation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "grow/domain_json.hpp"

namespace grow {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Collapses the whitespace left behind where a marker or payload was cut out.
std::string tidy(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t') {
      space = true;
      continue;
    }
    if (space && !out.empty() && out.back() != '\n' && c != '\n' && std::string_view(",.!?;:").find(c) == std::string_view::npos) {
      out.push_back(' ');
    }
    space = false;
    out.push_back(c);
  }
  return trim(out);
}

bool is_affirmative(std::string_view text) {
  static const std::regex negative(R"(\b(no|nope|not yet|wait|hold on|change|don't|do not)\b)", std::regex::icase);
  static const std::regex positive(
      R"(\b(yes|yeah|yep|yup|sure|ok|okay|save|done|go ahead|sounds good|please do|let's|lets|correct)\b)",
      std::regex::icase);
  const std::string s(text);
  return !std::regex_search(s, negative) && std::regex_search(s, positive);
}

bool has_active_goal(const UserProfile& p) {
  return std::any_of(p.mental_health_goals.begin(), p.mental_health_goals.end(),
                     [](const Goal& g) { return g.status == GoalStatus::Active; });
}

constexpr std::string_view kEmptyReplyFallback = "Thanks for sharing that. Let's keep going.";

}  // namespace

// ---------------------------------------------------------------------------

MarkerParse parse_markers(std::string_view model_text, Phase current) {
  MarkerParse out;
  std::optional<Phase> first;
  std::size_t first_pos = std::string_view::npos;
  for (auto [marker, target] : {std::pair{kOngoingMarker, Phase::ActiveCoaching},
                                std::pair{kGoalSettingMarker, Phase::GoalSetting}}) {
    const auto pos = model_text.find(marker);
    if (pos != std::string_view::npos && pos < first_pos) {
      first_pos = pos;
      first = target;
    }
  }

  // Cutting one marker out can splice a new one together, so repeat until
  // nothing is left.
  std::string text(model_text);
  bool removed = true;
  while (removed) {
    removed = false;
    for (auto marker : {kOngoingMarker, kGoalSettingMarker}) {
      for (auto pos = text.find(marker); pos != std::string::npos; pos = text.find(marker)) {
        text.erase(pos, marker.size());
        removed = true;
      }
    }
  }
  out.clean_text = tidy(text);

  if (first) {
    if (is_legal_transition(current, *first)) {
      out.transition = first;
    } else {
      out.illegal = true;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

int extract_bevs_score(std::string_view user_text) {
  static const std::regex token(R"(-?\d+(?:\.\d+)?|\b(?:one|two|three|four|five|six|seven|eight|nine|ten|zero)\b)",
                                std::regex::icase);
  static const std::map<std::string, std::string> words = {
      {"zero", "0"}, {"one", "1"}, {"two", "2"},   {"three", "3"}, {"four", "4"}, {"five", "5"},
      {"six", "6"},  {"seven", "7"}, {"eight", "8"}, {"nine", "9"}, {"ten", "10"}};
  const std::string text(user_text);
  std::vector<std::string> found;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), token); it != std::sregex_iterator(); ++it) {
    std::string t = lower(it->str());
    if (auto w = words.find(t); w != words.end()) t = w->second;
    found.push_back(t);
  }
  if (found.size() != 1) {
    throw GrowError(ErrorCode::ScoreOutOfRange, "expected one score from 1 to 7");
  }
  return validate_bevs_score(found.front());
}

std::string bevs_directive(const BevsRecord& record) {
  const std::string domain(kBevsDomains[static_cast<std::size_t>(std::clamp(record.domain_index, 0, 3))]);
  switch (record.current_step) {
    case BevsStep::Intro:
      return "Briefly introduce a short values check-in across four areas of life and ask whether they are "
             "ready to start with " + domain + ".";
    case BevsStep::CollectValues:
      return "Ask what kind of person they want to be, or what matters most to them, in " + domain + ".";
    case BevsStep::CollectScores:
      return "Ask, on a scale of 1 to 7, how close their recent actions have been to what they value in " +
             domain + ".";
    case BevsStep::Confirm: {
      if (record.assessments.empty()) return "Ask whether they would like to save the values check-in.";
      auto [lo, hi] = std::minmax_element(record.assessments.begin(), record.assessments.end(),
                                          [](const BevsAssessment& a, const BevsAssessment& b) {
                                            return a.score < b.score;
                                          });
      return "Summarise the check-in in two or three lines. Lowest area: " + lo->domain + " (" +
             std::to_string(lo->score) + "). Highest area: " + hi->domain + " (" + std::to_string(hi->score) +
             "). Suggest one tiny action that fits their values, then ask whether to save this values "
             "check-in and move on.";
    }
    case BevsStep::Done:
      return "Thank them. Say that now you know what matters to them, you can set a goal that fits those "
             "values, and include [GOAL_SETTING_PHASE].";
  }
  return {};
}

BevsStepResult bevs_step(const BevsRecord& record, std::string_view user_text, Timestamp now) {
  if (record.done()) throw GrowError(ErrorCode::InvalidArgument, "values check-in already finished");
  BevsStepResult out{record, {}, std::nullopt};
  BevsRecord& r = out.record;
  switch (record.current_step) {
    case BevsStep::Intro:
      r.current_step = BevsStep::CollectValues;
      r.domain_index = 0;
      break;
    case BevsStep::CollectValues:
      r.pending_value = trim(user_text);
      r.current_step = BevsStep::CollectScores;
      break;
    case BevsStep::CollectScores:
      try {
        const int score = extract_bevs_score(user_text);
        const std::string domain(kBevsDomains[static_cast<std::size_t>(r.domain_index)]);
        r.assessments.push_back({domain, r.pending_value.value_or(""), score});
        r.pending_value.reset();
        if (r.domain_index < 3) {
          ++r.domain_index;
          r.current_step = BevsStep::CollectValues;
        } else {
          r.current_step = BevsStep::Confirm;
        }
      } catch (const GrowError& e) {
        if (e.code() != ErrorCode::ScoreOutOfRange) throw;
        out.error = ErrorCode::ScoreOutOfRange;
        out.directive = "The reply was not a whole number from 1 to 7. Gently ask again for a score from 1 "
                        "(not close at all) to 7 (very close) for " +
                        std::string(kBevsDomains[static_cast<std::size_t>(r.domain_index)]) + ".";
        return out;
      }
      break;
    case BevsStep::Confirm:
      if (is_affirmative(user_text)) {
        r.current_step = BevsStep::Done;
        r.completed_at = now;
      } else {
        out.directive = "They have not confirmed yet. Ask if anything should change, or whether to save the "
                        "values check-in as it is.";
        return out;
      }
      break;
    case BevsStep::Done:
      break;
  }
  out.directive = bevs_directive(r);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> parse_lexicon(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(lower(line));
  }
  return out;
}

std::vector<std::string> load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GrowError(ErrorCode::ConfigError, "cannot read lexicon " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str());
}

std::optional<std::string> distress_guard(std::string_view user_text, std::span<const std::string> lexicon) {
  const std::string text = lower(user_text);
  for (const auto& phrase : lexicon) {
    if (!phrase.empty() && text.find(lower(phrase)) != std::string::npos) {
      return "The student may be referring to self-harm or crisis. Do not agree with or encourage any harmful "
             "idea. Respond with care in a few sentences, say you are not able to provide crisis support, and "
             "point them to the Support Resources tab, which lists counseling services and crisis lines.";
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Phase resume_phase(const UserProfile& profile) {
  if (!profile.intro_complete) return Phase::Introduction;
  if (!profile.bevs || !profile.bevs->done()) return Phase::ValuesCheckIn;
  const bool live = std::any_of(profile.mental_health_goals.begin(), profile.mental_health_goals.end(),
                                [](const Goal& g) { return g.status != GoalStatus::Completed; });
  return live ? Phase::ActiveCoaching : Phase::GoalSetting;
}

ConversationEngine::ConversationEngine(ProfileStore& store, ModelGateway& gateway, EngineConfig config)
    : store_(store), gateway_(gateway), config_(std::move(config)) {}

Timestamp ConversationEngine::now() const {
  if (config_.clock) return config_.clock();
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

SessionState ConversationEngine::start_session(const std::string& user_id,
                                               std::optional<std::string> display_name) const {
  const UserProfile profile = store_.load_profile(user_id);
  SessionState s;
  s.user_id = user_id;
  s.phase = resume_phase(profile);
  s.display_name = std::move(display_name);
  if (s.phase == Phase::ValuesCheckIn) {
    // An unfinished check-in restarts; partial answers live only in memory.
    s.pending_bevs = BevsRecord{now(), std::nullopt, BevsStep::Intro, 0, {}, std::nullopt};
  }
  return s;
}

EngineOutput ConversationEngine::greet(SessionState& session) { return run_turn(session, std::nullopt); }

EngineOutput ConversationEngine::advance(SessionState& session, std::string_view user_text) {
  const std::string text = trim(user_text);
  if (text.empty()) throw GrowError(ErrorCode::InvalidArgument, "message is empty");
  return run_turn(session, text);
}

EngineOutput ConversationEngine::run_turn(SessionState& session, std::optional<std::string_view> user_text) {
  const Timestamp t = now();
  const UserProfile profile = store_.load_profile(session.user_id);
  const UserSettings settings = store_.settings(session.user_id);

  SessionState work = session;
  EngineOutput out;
  if (user_text) work.history.push_back({Speaker::User, std::string(*user_text), t});

  std::vector<std::string> directives;
  if (user_text) {
    if (auto d = distress_guard(*user_text, config_.lexicon)) {
      directives.push_back(*d);
      out.resource_footer_attached = true;
    }
  }

  // Values check-in: the engine advances the step machine before the model
  // phrases the next question.
  std::optional<BevsRecord> bevs_before = work.pending_bevs;
  if (work.phase == Phase::ValuesCheckIn) {
    if (!work.pending_bevs) work.pending_bevs = BevsRecord{t, std::nullopt, BevsStep::Intro, 0, {}, std::nullopt};
    if (user_text && !work.pending_bevs->done()) {
      BevsStepResult step = bevs_step(*work.pending_bevs, *user_text, t);
      work.pending_bevs = step.record;
      if (step.error) {
        directives.push_back(step.directive);
        out.incidents.push_back("values check-in: score rejected, re-prompting");
      }
    }
  }
  if (work.phase == Phase::ActiveCoaching && work.arrived_from_goal_setting) {
    directives.push_back("The student has just finished setting goals. Ask if they feel set, say you will be "
                         "here whenever they want to check in, and close the conversation for now.");
  }

  PromptInputs inputs;
  inputs.phase = work.phase;
  inputs.phase_turn = work.phase_turn;
  inputs.profile = &profile;
  inputs.history = work.history;
  inputs.history_window = config_.history_window;
  inputs.persona = settings.persona;
  inputs.display_name = work.display_name;
  inputs.bevs = work.pending_bevs ? &*work.pending_bevs : nullptr;
  inputs.directives = directives;
  inputs.user_text = user_text ? std::string(*user_text) : std::string();
  const PromptBundle bundle = build_prompt(inputs, config_.templates);

  // Throws on gateway failure; nothing has been written yet.
  LlmResult result = gateway_.complete(bundle, config_.params);

  // From here on the turn commits.
  std::string reply = result.text;
  std::vector<ToolCall> calls;
  for (auto& c : result.tool_calls) {
    if (c.tool_name == kSaveProfileTool) {
      calls.push_back(std::move(c));
    } else {
      out.incidents.push_back("unknown tool '" + c.tool_name + "' ignored");
    }
  }
  if (calls.empty()) {
    if (auto inline_payload = repair_tool_payload(reply)) {
      const json& doc = inline_payload->document;
      const bool looks_like_save = doc.is_object() && std::any_of(doc.items().begin(), doc.items().end(), [](auto kv) {
                                     return parse_enum<Section>(kv.key()).has_value();
                                   });
      if (looks_like_save) {
        calls.push_back({std::string(kSaveProfileTool), doc});
        reply.erase(inline_payload->begin, inline_payload->end - inline_payload->begin);
        out.incidents.push_back("saveProfile payload recovered from reply text");
      }
    }
  }

  std::optional<Phase> auto_transition;
  for (const auto& call : calls) {
    if (work.phase == Phase::ValuesCheckIn) {
      out.incidents.push_back("saveProfile during the values check-in ignored; the engine saves it");
      continue;
    }
    PatchOutcome outcome;
    try {
      const auto patches = split_tool_payload(work.phase, call.payload);
      for (const auto& p : patches) outcome.sections.push_back(p.section);
      const std::optional<std::string_view> name =
          work.display_name ? std::optional<std::string_view>(*work.display_name) : std::nullopt;
      SaveResult saved = store_.save_profile(work.user_id, patches, t, name);
      outcome.accepted = true;
      outcome.detail = saved.changed ? "saved" : "no change";
      if (saved.display_name && !saved.display_name->empty() && !work.display_name) {
        work.display_name = saved.display_name;
        store_.rescrub_transcript(work.user_id, *work.display_name);
      }
      if (work.phase == Phase::Introduction && saved.profile.intro_complete) {
        auto_transition = Phase::ValuesCheckIn;
      }
    } catch (const GrowError& e) {
      outcome.error = e.code();
      outcome.detail = e.what();
      out.incidents.push_back("saveProfile rejected: " + std::string(to_string(e.code())) + ": " + e.what());
    }
    out.applied_patches.push_back(std::move(outcome));
  }

  if (work.phase == Phase::ValuesCheckIn && work.pending_bevs && work.pending_bevs->done() &&
      !(bevs_before && bevs_before->done())) {
    PatchOutcome outcome;
    outcome.sections = {Section::Bevs};
    try {
      const std::optional<std::string_view> name =
          work.display_name ? std::optional<std::string_view>(*work.display_name) : std::nullopt;
      store_.save_profile(work.user_id, ToolCallPatch{Phase::ValuesCheckIn, Section::Bevs, json(*work.pending_bevs)}, t,
                          name);
      outcome.accepted = true;
      outcome.detail = "saved";
      auto_transition = Phase::GoalSetting;
    } catch (const GrowError& e) {
      outcome.error = e.code();
      outcome.detail = e.what();
      out.incidents.push_back("values check-in save rejected: " + std::string(e.what()));
    }
    out.applied_patches.push_back(std::move(outcome));
  }

  MarkerParse markers = parse_markers(reply, work.phase);
  if (markers.illegal) {
    out.incidents.push_back("illegal phase marker from " + std::string(to_string(work.phase)) + " discarded");
  }
  std::optional<Phase> transition = auto_transition;
  if (!transition && markers.transition) {
    const UserProfile current = store_.load_profile(work.user_id);
    const Phase target = *markers.transition;
    if (target == Phase::GoalSetting && work.phase == Phase::ValuesCheckIn &&
        !(current.bevs && current.bevs->done())) {
      out.incidents.push_back("goal-setting marker before the values check-in was saved discarded");
    } else if (target == Phase::ActiveCoaching && !has_active_goal(current)) {
      out.incidents.push_back("ongoing marker without an active goal discarded");
    } else {
      transition = target;
    }
  }

  std::string clean = markers.clean_text;
  if (clean.empty()) clean = std::string(kEmptyReplyFallback);
  if (out.resource_footer_attached) clean += "\n\n" + std::string(kResourceFooter);
  out.reply_text = clean;

  work.arrived_from_goal_setting = false;
  if (transition) {
    if (transition == Phase::ActiveCoaching && work.phase == Phase::GoalSetting) work.arrived_from_goal_setting = true;
    work.phase = *transition;
    work.phase_turn = 0;
    work.pending_bevs.reset();
    if (work.phase == Phase::ValuesCheckIn) {
      work.pending_bevs = BevsRecord{t, std::nullopt, BevsStep::Intro, 0, {}, std::nullopt};
    }
    out.transition = transition;
  } else {
    ++work.phase_turn;
  }
  work.history.push_back({Speaker::Coach, out.reply_text, t});
  if (user_text) ++work.turn_count;

  const std::optional<std::string_view> name =
      work.display_name ? std::optional<std::string_view>(*work.display_name) : std::nullopt;
  if (user_text) store_.append_transcript(work.user_id, work.history[work.history.size() - 2], name);
  store_.append_transcript(work.user_id, work.history.back(), name);

  for (const auto& incident : out.incidents) spdlog::warn("session {}: {}", work.user_id, incident);
  session = std::move(work);
  return out;
}

// ---------------------------------------------------------------------------

bool SessionRegistry::has_session(const std::string& user_id) const {
  std::lock_guard lock(mutex_);
  return slots_.contains(user_id);
}

void SessionRegistry::drop(const std::string& user_id) {
  std::lock_guard lock(mutex_);
  slots_.erase(user_id);
}

}  // namespace grow
