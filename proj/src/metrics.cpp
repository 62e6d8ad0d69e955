#include "grow/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "grow/domain_json.hpp"
#include "grow/error.hpp"
#include "grow/store.hpp"

namespace grow {
namespace {

// Half away from zero for non-negative num / den.
int round_ratio(long long num, long long den) { return static_cast<int>((2 * num + den) / (2 * den)); }

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool has_alnum(std::string_view tok) {
  return std::any_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isalnum(c); });
}

bool has_digit(std::string_view tok) {
  return std::any_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string strip_punct(std::string_view tok) {
  std::string t;
  for (unsigned char c : tok) {
    if (std::isalnum(c) || c == '\'') t.push_back(static_cast<char>(std::tolower(c)));
  }
  return t;
}

// Normalizes the typographic apostrophe to ASCII.
std::string ascii_apostrophes(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        static_cast<unsigned char>(s[i + 2]) == 0x99) {
      out.push_back('\'');
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

bool is_contraction(std::string_view word) {
  const auto pos = word.find('\'');
  return pos != std::string_view::npos && pos > 0 && pos + 1 < word.size() &&
         std::isalpha(static_cast<unsigned char>(word[pos - 1])) &&
         std::isalpha(static_cast<unsigned char>(word[pos + 1]));
}

bool is_slang(std::string_view word) {
  static const std::set<std::string, std::less<>> kSlang = {
      "lol", "lmao", "gonna", "wanna", "gotta", "kinda", "sorta", "ya",   "yeah", "yep", "nah", "omg",
      "tbh", "idk",  "btw",   "u",     "ur",    "cuz",   "dunno", "hey",  "yo",   "pls", "thx", "haha"};
  return kSlang.contains(word);
}

std::size_t count_emoji(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = 0;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6 && i + 1 < s.size()) {
      cp = ((c & 0x1F) << 6) | (s[i + 1] & 0x3F);
      len = 2;
    } else if ((c >> 4) == 0xE && i + 2 < s.size()) {
      cp = ((c & 0x0F) << 12) | ((s[i + 1] & 0x3F) << 6) | (s[i + 2] & 0x3F);
      len = 3;
    } else if ((c >> 3) == 0x1E && i + 3 < s.size()) {
      cp = ((c & 0x07) << 18) | ((s[i + 1] & 0x3F) << 12) | ((s[i + 2] & 0x3F) << 6) | (s[i + 3] & 0x3F);
      len = 4;
    }
    if ((cp >= 0x1F300 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF)) ++n;
    i += len;
  }
  for (std::string_view emoticon : {":)", ":-)", ":(", ":-(", ":D", ";)", "<3"}) {
    for (auto pos = s.find(emoticon); pos != std::string_view::npos; pos = s.find(emoticon, pos + emoticon.size())) ++n;
  }
  return n;
}

std::optional<json> parse_reply_json(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (!doc.is_discarded()) return doc;
  if (auto extracted = repair_tool_payload(text)) return extracted->document;
  // A bare array wrapped in prose.
  const auto b = text.find('[');
  const auto e = text.rfind(']');
  if (b != std::string_view::npos && e != std::string_view::npos && b < e) {
    doc = json::parse(text.substr(b, e - b + 1), nullptr, false);
    if (!doc.is_discarded()) return doc;
  }
  return std::nullopt;
}

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

std::string fmt_double(double v) {
  std::ostringstream o;
  o.precision(3);
  o << std::fixed << v;
  return o.str();
}

}  // namespace

OverallProgress overall_goal_progress(std::span<const Goal> goals) {
  long long sum = 0;
  std::size_t n = 0;
  for (const auto& g : goals) {
    if (g.status != GoalStatus::Active) continue;
    sum += g.progress;
    ++n;
  }
  if (n == 0) return {0, 0};
  return {round_ratio(sum, static_cast<long long>(n)), n};
}

int checkin_consistency(std::span<const Date> checkin_days, Date today, int window_days) {
  if (window_days <= 0) throw GrowError(ErrorCode::InvalidArgument, "window must be positive");
  const Date first = today - std::chrono::days{window_days - 1};
  std::set<Date> distinct;
  for (Date d : checkin_days) {
    if (d >= first && d <= today) distinct.insert(d);
  }
  return round_ratio(static_cast<long long>(distinct.size()) * 100, window_days);
}

int checkin_consistency(std::span<const Timestamp> checkins, Date today, std::chrono::minutes utc_offset,
                        int window_days) {
  std::vector<Date> days;
  days.reserve(checkins.size());
  for (auto t : checkins) days.push_back(local_date(t, utc_offset));
  return checkin_consistency(days, today, window_days);
}

// ---------------------------------------------------------------------------

StyleMetrics compute_style_metrics(std::span<const std::string> user_messages) {
  if (user_messages.empty()) throw GrowError(ErrorCode::InsufficientData, "no user messages to classify");
  std::size_t words = 0, marks = 0, digit_words = 0, casual_words = 0;
  for (const auto& raw : user_messages) {
    const std::string msg = ascii_apostrophes(raw);
    marks += static_cast<std::size_t>(std::count(msg.begin(), msg.end(), '!'));
    marks += count_emoji(msg);
    for (const auto& tok : split_ws(msg)) {
      if (!has_alnum(tok)) continue;
      ++words;
      if (has_digit(tok)) ++digit_words;
      const std::string w = strip_punct(tok);
      if (is_contraction(w) || is_slang(w)) ++casual_words;
    }
  }
  StyleMetrics m;
  const double n = static_cast<double>(user_messages.size());
  m.avg_words_per_user_message = static_cast<double>(words) / n;
  m.emoji_or_exclaim_rate = static_cast<double>(marks) / n;
  m.digit_token_ratio = words ? static_cast<double>(digit_words) / static_cast<double>(words) : 0.0;
  m.contraction_slang_rate = words ? static_cast<double>(casual_words) / static_cast<double>(words) : 0.0;
  return m;
}

CommunicationStyle fallback_style(const StyleMetrics& m, const StyleThresholds& t) {
  CommunicationStyle s;
  s.length = m.avg_words_per_user_message <= t.short_max_words ? MessageLength::Short : MessageLength::Long;
  s.emotional_style =
      m.emoji_or_exclaim_rate >= t.expressive_min_rate ? EmotionalStyle::Expressive : EmotionalStyle::Neutral;
  s.thinking_style =
      m.digit_token_ratio >= t.data_driven_min_ratio ? ThinkingStyle::DataDriven : ThinkingStyle::ExperienceBased;
  s.tone = m.contraction_slang_rate >= t.casual_min_rate ? Tone::Casual : Tone::Formal;
  return s;
}

std::optional<CommunicationStyle> parse_style_document(const json& doc) {
  if (!doc.is_object() || doc.size() != 4) return std::nullopt;
  for (const char* key : {"tone", "length", "emotional_style", "thinking_style"}) {
    if (!doc.contains(key) || !doc.at(key).is_string()) return std::nullopt;
  }
  auto tone = parse_enum<Tone>(doc.at("tone").get<std::string>());
  auto length = parse_enum<MessageLength>(doc.at("length").get<std::string>());
  auto emo = parse_enum<EmotionalStyle>(doc.at("emotional_style").get<std::string>());
  auto think = parse_enum<ThinkingStyle>(doc.at("thinking_style").get<std::string>());
  if (!tone || !length || !emo || !think) return std::nullopt;
  return CommunicationStyle{*tone, *length, *emo, *think};
}

StyleResult classify_style(std::span<const std::string> user_messages, ModelGateway* gateway,
                           std::string_view prompt_template, const LlmParams& params,
                           const StyleThresholds& thresholds) {
  StyleResult out;
  out.metrics = compute_style_metrics(user_messages);
  out.style = fallback_style(out.metrics, thresholds);
  if (!gateway) return out;

  std::string transcript;
  for (const auto& m : user_messages) transcript += "User: " + m + "\n";
  const std::string metrics = "avg_words_per_user_message: " + fmt_double(out.metrics.avg_words_per_user_message) +
                              "\nemoji_or_exclaim_rate: " + fmt_double(out.metrics.emoji_or_exclaim_rate) +
                              "\ndigit_token_ratio: " + fmt_double(out.metrics.digit_token_ratio) +
                              "\ncontraction_slang_rate: " + fmt_double(out.metrics.contraction_slang_rate);
  PromptBundle bundle;
  bundle.phase = Phase::ActiveCoaching;
  bundle.system_text = "You classify communication style. Output JSON only.";
  bundle.task_text = replace_all(replace_all(std::string(prompt_template), "[metrics]", metrics), "[transcript]",
                                 transcript);
  bundle.user_text = "Classify the communication style of these messages.";
  try {
    const LlmResult r = gateway->complete(bundle, params);
    if (auto doc = parse_reply_json(r.text)) {
      if (auto style = parse_style_document(*doc)) {
        out.style = *style;
        out.from_model = true;
        return out;
      }
    }
    spdlog::info("style classifier reply rejected, using fallback thresholds");
  } catch (const GrowError& e) {
    spdlog::warn("style classifier unavailable ({}), using fallback thresholds", e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> parse_themes(std::string_view model_text) {
  std::vector<std::string> out;
  auto doc = parse_reply_json(model_text);
  if (!doc) return out;
  const json* list = nullptr;
  if (doc->is_array()) {
    list = &*doc;
  } else if (doc->is_object() && doc->contains("themes") && doc->at("themes").is_array()) {
    list = &doc->at("themes");
  }
  if (!list) return out;
  for (const auto& item : *list) {
    if (out.size() == kMaxThemes) break;
    if (!item.is_string()) continue;
    const auto words = split_ws(item.get<std::string>());
    if (words.empty() || words.size() > kMaxThemeWords) continue;
    std::string theme;
    for (const auto& w : words) theme += (theme.empty() ? "" : " ") + w;
    out.push_back(std::move(theme));
  }
  return out;
}

ThemeResult summarize_themes(std::span<const ChatTurn> history, ModelGateway& gateway,
                             std::string_view prompt_template, const std::vector<std::string>& previous,
                             std::optional<Date> previous_on, Date today, const LlmParams& params) {
  if (history.empty()) throw GrowError(ErrorCode::InsufficientData, "no conversation to summarize");
  if (previous_on && *previous_on == today) return {previous, false, false};

  std::string rendered;
  for (const auto& t : history) rendered += (t.speaker == Speaker::User ? "User: " : "Coach: ") + t.text + "\n";
  PromptBundle bundle;
  bundle.phase = Phase::ActiveCoaching;
  bundle.system_text = "You summarize coaching conversations into short themes. Output JSON only.";
  bundle.task_text = replace_all(std::string(prompt_template), "[history]", rendered);
  bundle.user_text = "List the key themes of this conversation.";
  try {
    const LlmResult r = gateway.complete(bundle, params);
    return {parse_themes(r.text), false, true};
  } catch (const GrowError& e) {
    spdlog::warn("theme summary unavailable: {}", e.what());
    return {previous, true, false};
  }
}

// ---------------------------------------------------------------------------

std::vector<DartboardPoint> dartboard_view(const std::optional<BevsRecord>& bevs) {
  if (!bevs || !bevs->done()) throw GrowError(ErrorCode::NotReady, "values check-in not complete");
  std::vector<DartboardPoint> out;
  for (auto domain : kBevsDomains) {
    auto it = std::find_if(bevs->assessments.begin(), bevs->assessments.end(),
                           [&](const BevsAssessment& a) { return a.domain == domain; });
    if (it == bevs->assessments.end()) throw GrowError(ErrorCode::NotReady, "values check-in is missing a domain");
    out.push_back({it->domain, it->score, static_cast<double>(8 - it->score) / 7.0});
  }
  return out;
}

// ---------------------------------------------------------------------------

void to_json(json& j, const SupportResource& r) {
  j = json{{"title", r.title}, {"description", r.description}, {"url", r.url}, {"category", to_string(r.category)}};
}

DashboardPayload build_dashboard(const DashboardInputs& in) {
  DashboardPayload d;
  d.display_phase = std::string(display_label(in.phase));
  if (in.profile) {
    const auto overall = overall_goal_progress(in.profile->mental_health_goals);
    d.overall_progress = overall.percent;
    d.active_goal_count = overall.active_count;
    for (const auto& g : in.profile->mental_health_goals) {
      GoalView v{g.goal_id, g.description, g.timeframe.duration_days, g.steps, g.progress, g.status, {}};
      for (const auto& e : in.events) {
        if (e.goal_id == g.goal_id) v.scheduled_checkins.push_back(e);
      }
      d.goals_view.push_back(std::move(v));
    }
    d.style = in.profile->communication_style;
    if (in.profile->bevs && in.profile->bevs->done()) d.dartboard = dartboard_view(in.profile->bevs);
  }
  d.consistency = checkin_consistency(in.checkins, in.today, in.utc_offset);
  d.themes = in.themes;
  d.themes_stale = in.themes_stale;
  d.resources = in.resources;
  return d;
}

void to_json(json& j, const DashboardPayload& d) {
  json goals = json::array();
  for (const auto& g : d.goals_view) {
    goals.push_back({{"goal_id", g.goal_id},
                     {"description", g.description},
                     {"duration_days", g.duration_days},
                     {"next_steps", g.next_steps},
                     {"progress", g.progress},
                     {"status", to_string(g.status)},
                     {"scheduled_checkins", g.scheduled_checkins}});
  }
  json dartboard = json::array();
  for (const auto& p : d.dartboard) {
    dartboard.push_back({{"domain", p.domain}, {"score", p.score}, {"radius", p.radius}});
  }
  j = json{
      {"display_phase", d.display_phase},
      {"overall_progress", d.overall_progress},
      {"active_goal_count", d.active_goal_count},
      {"consistency", d.consistency},
      {"tooltips",
       {{"overall_progress", "Average completion across your active goals."},
        {"consistency", "Share of the last 7 days on which you checked in. It rises when you check in "
                        "regularly and falls after longer gaps."}}},
      {"goals_view", goals},
      {"insights",
       {{"themes", d.themes},
        {"themes_stale", d.themes_stale},
        {"style", d.style ? json(*d.style) : json(nullptr)},
        {"dartboard", dartboard}}},
      {"resources", d.resources},
  };
}

}  // namespace grow
