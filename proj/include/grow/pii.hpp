#pragma once

#include <optional>
#include <regex>
#include <string>
#include <string_view>

namespace grow {

inline constexpr std::string_view kRedactedEmail = "[REDACTED_EMAIL]";
inline constexpr std::string_view kRedactedPhone = "[REDACTED_PHONE]";
inline constexpr std::string_view kNamePlaceholder = "[NAME]";

// The patterns the scrubber removes. Exposed so audits can scan stored data
// with exactly the same expressions.
const std::regex& email_pattern();
const std::regex& phone_pattern();

// Replaces email addresses and phone numbers with redaction tokens, and the
// session display name (whole word, case-insensitive) with a placeholder.
// Errs towards over-redaction. Idempotent.
std::string scrub_pii(std::string_view text,
                      std::optional<std::string_view> display_name = std::nullopt);

bool contains_pii_pattern(std::string_view text);

}  // namespace grow
