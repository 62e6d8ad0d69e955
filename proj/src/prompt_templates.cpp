#include <fstream>
#include <sstream>

#include "grow/conversation.hpp"
#include "grow/domain_json.hpp"

namespace grow {
namespace {

constexpr std::string_view kIntroductionTemplate = R"(Task: INTRODUCTION PHASE.
Get to know the student before any goal work. One question per message, friendly and never clinical.

Items to learn (all ten are required before saving):
Basic information
- college year
- major
- emotional awareness (high / medium / low, judged from how they describe noticing their feelings)
- coping style (healthy / mixed / avoidant, judged from what they do when things get hard)
- encouragement that helps them (praise / progress / achievement / effort)
Personality, asked casually, each judged high / moderate / low
- Openness: curiosity about new things and ideas
- Conscientiousness: how natural structure and follow-through feel
- Extraversion: outgoing or reserved
- Agreeableness: how much they prioritise harmony with others
- Neuroticism: how often worry or stress shows up
Also ask their first name so you can address them, and how they are feeling. Neither is saved.

Still missing: [missing_fields]

Recent conversation:
[history]

Rules:
- Never ask the student to pick a label. Infer the level from their own words.
- Call saveProfile once, only when all ten items are known, sending demographic, all five personality_traits and mental_health_profile together.
- Once saved, thank them and say you would like to hear what matters to them across different parts of life.
- Do not write any phase marker. The system moves on by itself.)";

constexpr std::string_view kValuesCheckInTemplate = R"(Task: VALUES CHECK-IN.
Explore what matters to the student in four life areas and how closely their recent actions match, scored 1 (not close at all) to 7 (very close).

Recent conversation:
[history]

State (kept by the system, not by you):
Current step: [currentStep]
Current domain index: [domainIndex] (0 Work/Studies, 1 Relationships, 2 Personal Growth/Health, 3 Leisure)

What to do now:
[step_directive]

Constraints:
- Call it the "values check-in". Never use survey names or abbreviations.
- One question per message. Warm and short. Offer everyday examples of values when it helps.
- Never show JSON, scores tables or tool details. The system saves the check-in itself.)";

constexpr std::string_view kGoalSettingTemplate = R"(Task: GOAL SETTING PHASE.
Help the student turn something they value into one small, concrete goal.

Profile:
[user_profile]

Recent conversation:
[history]

Steps, one question at a time:
- Ask which area of well-being feels most important right now and settle on one.
- Shape it into a goal that is specific, measurable with a weekly target (a count or minutes per week), achievable, tied to their values, and bounded in time.
- Agree on one to three small first actions and one likely obstacle with a brief way to respond to it.
- Check that the goal feels realistic.

Saving:
- Call saveProfile with mental_health_goals: a list of new goals, each with description, measures {unit, weekly_target, completed_units: 0}, timeframe {start_date, duration_days}, steps, obstacles, completed: false, progress: 0.
- When the student says they have enough goals for now, write [ONGOING_PHASE] in your reply.)";

constexpr std::string_view kActiveCoachingTemplate = R"(Task: ONGOING COACHING PHASE.
Support progress on existing goals with short, practical replies.

Profile and goals:
[user_profile]

Recent conversation:
[history]

How to respond:
- Open with a quick check-in. Do not repeat a question the last four turns already answered.
- Work on one goal at a time. Ask briefly about progress or what got in the way.
- When they ask for a snapshot, state progress from the profile, e.g. "Your reading goal is at 40% (2 of 5 this week)."
- Offer one small next step tied to what they value. Celebrate wins and normalise setbacks.
- Stay supportive and non-clinical. No diagnosis or treatment language.
- When progress changes, call saveProfile once with mental_health_goals: a list of updates, each naming goal_id plus the changed fields (completed_units, progress, completed, steps, obstacles, description).
- If nothing changed, make no tool call.
- If every goal is finished, write [GOAL_SETTING_PHASE] in your reply.
- Close with one small action to try before next time.)";

constexpr std::string_view kStyleClassifierTemplate = R"(Classify the communication style of the student in the transcript below. Use only lines that begin with "User:". Treat the metrics as tie-breakers.

tone: "formal" or "casual"
length: "short" (about 12 words or fewer per message) or "long"
emotional_style: "expressive" or "neutral"
thinking_style: "data-driven" or "experience-based"

Metrics:
[metrics]

Transcript:
[transcript]

Answer with one JSON object holding exactly the keys tone, length, emotional_style, thinking_style and nothing else.)";

constexpr std::string_view kThemesTemplate = R"(List up to five short themes from the student's recent coaching conversations: recurring topics, challenges and moments of reflection.
Each theme is a noun phrase of at most eight words. Do not quote the student.

Transcript:
[history]

Answer with one JSON object: {"themes": ["...", "..."]}.)";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string persona_line(const CoachPersona& persona) {
  std::string line = "You are " + persona.name + ", a supportive, non-clinical coach for college students.";
  switch (persona.gender) {
    case CoachGender::Female:
      line += " You present as a woman.";
      break;
    case CoachGender::Male:
      line += " You present as a man.";
      break;
    case CoachGender::NonBinary:
      line += " You present as non-binary.";
      break;
    case CoachGender::Unspecified:
      break;
  }
  return line;
}

std::string style_line(const CommunicationStyle& s) {
  std::string line = "Match the student's way of talking: ";
  line += s.tone == Tone::Casual ? "casual tone" : "polite, fairly formal tone";
  line += s.length == MessageLength::Short ? ", short replies" : ", fuller replies";
  line += s.emotional_style == EmotionalStyle::Expressive ? ", warm and expressive" : ", calm and matter-of-fact";
  line += s.thinking_style == ThinkingStyle::DataDriven ? ", concrete numbers and structure."
                                                        : ", examples and lived experience.";
  return line;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

PromptTemplates PromptTemplates::defaults() {
  return {std::string(kIntroductionTemplate),   std::string(kValuesCheckInTemplate),
          std::string(kGoalSettingTemplate),    std::string(kActiveCoachingTemplate),
          std::string(kStyleClassifierTemplate), std::string(kThemesTemplate)};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  PromptTemplates t = defaults();
  const std::pair<const char*, std::string*> files[] = {
      {"introduction.txt", &t.introduction},   {"values_checkin.txt", &t.values_checkin},
      {"goal_setting.txt", &t.goal_setting},   {"active_coaching.txt", &t.active_coaching},
      {"style_classifier.txt", &t.style_classifier}, {"themes.txt", &t.themes},
  };
  for (const auto& [name, slot] : files) {
    const auto path = dir / name;
    if (std::filesystem::exists(path)) *slot = read_file(path);
  }
  return t;
}

const std::string& PromptTemplates::for_phase(Phase phase) const {
  switch (phase) {
    case Phase::Introduction:
      return introduction;
    case Phase::ValuesCheckIn:
      return values_checkin;
    case Phase::GoalSetting:
      return goal_setting;
    case Phase::ActiveCoaching:
      return active_coaching;
  }
  return introduction;
}

std::vector<PromptMessage> few_shot_examples(Phase phase) {
  switch (phase) {
    case Phase::Introduction:
      return {
          {"user", "hey, I'm pretty tired today but ok"},
          {"assistant", "Thanks for being honest about that. Tired-but-ok is a real state. Before we go on, "
                        "what year are you in, and what are you studying?"},
          {"user", "Second year, biology."},
          {"assistant", "Biology, nice. When a week gets stressful, what do you usually find yourself doing?"},
      };
    case Phase::ValuesCheckIn:
      return {
          {"user", "sure, let's do it"},
          {"assistant", "Great. Starting with work and studies: what kind of student do you want to be?"},
          {"user", "someone who actually understands things, not just crams"},
          {"assistant", "Learning deeply, that's a lovely value. On a scale of 1 to 7, how close have your "
                        "recent study habits been to it?"},
      };
    case Phase::GoalSetting:
      return {
          {"user", "I want to stress less"},
          {"assistant", "That matters. What usually happens right before stress builds up for you?"},
          {"user", "I stay up late scrolling and then feel awful"},
          {"assistant", "So a calmer evening could help. How about a 10-minute phone-free wind-down, "
                        "4 evenings a week, for the next two weeks?"},
      };
    case Phase::ActiveCoaching:
      return {
          {"user", "I only did it twice this week"},
          {"assistant", "Twice still counts, and it is more than zero. What got in the way on the other days?"},
          {"user", "late labs"},
          {"assistant", "Late labs are tough. Would a 5-minute version on lab days feel doable?"},
      };
  }
  return {};
}

std::string substitute(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '[') {
      const auto close = text.find(']', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(text.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string render_history(std::span<const ChatTurn> history, std::size_t window) {
  const std::size_t first = history.size() > window ? history.size() - window : 0;
  std::string out;
  for (std::size_t i = first; i < history.size(); ++i) {
    out += history[i].speaker == Speaker::User ? "User: " : "Coach: ";
    out += history[i].text;
    out += '\n';
  }
  return out.empty() ? "(none yet)\n" : out;
}

PromptBundle build_prompt(const PromptInputs& in, const PromptTemplates& templates) {
  PromptBundle bundle;
  bundle.phase = in.phase;
  bundle.phase_turn = in.phase_turn;
  bundle.user_text = in.user_text;

  std::string system = persona_line(in.persona);
  system += "\nCurrent phase: " + std::string(to_string(in.phase)) + ".";
  if (in.display_name) system += "\nThe student's first name is " + *in.display_name + ".";
  if (in.profile && in.profile->communication_style) system += "\n" + style_line(*in.profile->communication_style);
  system += "\nReply in plain conversational text. Never show JSON or tool details.";
  for (const auto& d : in.directives) system += "\n" + d;
  bundle.system_text = std::move(system);

  std::map<std::string, std::string> values;
  values["history"] = render_history(in.history, in.history_window);
  if (in.profile) {
    json profile = *in.profile;
    profile.erase("user_id");
    values["user_profile"] = profile.dump(2);
    auto missing = intro_missing_fields(*in.profile);
    values["missing_fields"] = missing.empty() ? "none" : join(missing, ", ");
  }
  if (in.bevs) {
    values["currentStep"] = std::string(to_string(in.bevs->current_step));
    values["domainIndex"] = std::to_string(in.bevs->domain_index);
    values["step_directive"] = bevs_directive(*in.bevs);
  }
  bundle.task_text = substitute(templates.for_phase(in.phase), values);
  bundle.few_shot = few_shot_examples(in.phase);

  // The engine writes the values check-in itself, so no tool is offered there.
  bundle.tool_schema = in.phase == Phase::ValuesCheckIn ? json(nullptr) : tool_schema_for(in.phase);
  return bundle;
}

}  // namespace grow
