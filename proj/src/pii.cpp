#include "grow/pii.hpp"

namespace grow {
namespace {

std::string escape_regex(std::string_view text) {
  static constexpr std::string_view kSpecial = R"(\^$.|?*+()[]{}/-)";
  std::string out;
  out.reserve(text.size() * 2);
  for (char c : text) {
    if (kSpecial.find(c) != std::string_view::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

// The pattern starts at a digit, so "(555) 123-4567" matches from "555";
// take the opening parenthesis along with it.
std::string scrub_phones(const std::string& text) {
  std::string out;
  std::size_t copied = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), phone_pattern()); it != std::sregex_iterator(); ++it) {
    std::size_t start = static_cast<std::size_t>(it->position());
    if (start > copied && text[start - 1] == '(' && it->str().find(')') != std::string::npos) --start;
    out.append(text, copied, start - copied);
    out += kRedactedPhone;
    copied = static_cast<std::size_t>(it->position() + it->length());
  }
  out.append(text, copied);
  return out;
}

}  // namespace

const std::regex& email_pattern() {
  static const std::regex re(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})");
  return re;
}

// Seven to fifteen digits, optionally led by '+', with at most two separator
// characters between consecutive digits.
const std::regex& phone_pattern() {
  static const std::regex re(R"(\+?\d(?:[\s().-]{0,2}\d){6,14})");
  return re;
}

std::string scrub_pii(std::string_view text, std::optional<std::string_view> display_name) {
  std::string out = std::regex_replace(std::string(text), email_pattern(), std::string(kRedactedEmail));
  out = scrub_phones(out);
  if (display_name && display_name->size() >= 2) {
    const std::regex name_re("\\b" + escape_regex(*display_name) + "\\b", std::regex::icase);
    out = std::regex_replace(out, name_re, std::string(kNamePlaceholder));
  }
  return out;
}

bool contains_pii_pattern(std::string_view text) {
  const std::string s(text);
  return std::regex_search(s, email_pattern()) || std::regex_search(s, phone_pattern());
}

}  // namespace grow
