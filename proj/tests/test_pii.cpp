#include <gtest/gtest.h>

#include <random>

#include "grow/pii.hpp"

using namespace grow;

TEST(Pii, Email) { EXPECT_EQ(scrub_pii("email me at a@b.com"), "email me at [REDACTED_EMAIL]"); }

TEST(Pii, NoPiiIsVerbatim) {
  const std::string text = "I practiced for 10 minutes on day 3, felt 100% better!";
  EXPECT_EQ(scrub_pii(text), text);
}

TEST(Pii, PhoneFormats) {
  for (const char* phone : {"555-123-4567", "(555) 123-4567", "+1 555 123 4567", "5551234567", "+44 20 7946 0958"}) {
    EXPECT_EQ(scrub_pii(std::string("call ") + phone + " tonight"), "call [REDACTED_PHONE] tonight") << phone;
  }
}

TEST(Pii, ShortNumbersKept) {
  EXPECT_EQ(scrub_pii("3 of 7 sessions, 10 minutes, 2026"), "3 of 7 sessions, 10 minutes, 2026");
}

TEST(Pii, DisplayNameWholeWordCaseInsensitive) {
  EXPECT_EQ(scrub_pii("Hi, I'm Miya and MIYA is my name", std::string_view("Miya")), "Hi, I'm [NAME] and [NAME] is my name");
  EXPECT_EQ(scrub_pii("Miyazaki films", std::string_view("Miya")), "Miyazaki films");
}

TEST(Pii, NameWithRegexCharacters) {
  EXPECT_EQ(scrub_pii("Hello J.D. here", std::string_view("J.D")), "Hello [NAME]. here");
  EXPECT_EQ(scrub_pii("JxD stays", std::string_view("J.D")), "JxD stays");
}

TEST(Pii, PropertyIdempotentAndClean) {
  std::mt19937 rng(7);
  const std::vector<std::string> parts = {"hello", "Rowan", "rowan@uni.edu", "555-867-5309", "+1 (212) 555 0100",
                                          "3", "times", "a.b@c.io", "2026", "week", "x", "!", "12 34 56 78"};
  for (int i = 0; i < 500; ++i) {
    std::string text;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) text += parts[rng() % parts.size()] + " ";
    const std::string once = scrub_pii(text, std::string_view("Rowan"));
    EXPECT_EQ(scrub_pii(once, std::string_view("Rowan")), once) << text;
    EXPECT_FALSE(contains_pii_pattern(once)) << text;
    EXPECT_EQ(once.find("Rowan"), std::string::npos) << text;
  }
}
