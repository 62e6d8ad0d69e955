#include "grow/time.hpp"

#include <charconv>
#include <cstdio>

#include "grow/error.hpp"

namespace grow {
namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
  int value = 0;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw GrowError(ErrorCode::InvalidArgument, "malformed date/time: " + std::string(text));
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (text[pos] != c) {
    throw GrowError(ErrorCode::InvalidArgument, "malformed date/time: " + std::string(text));
  }
}

}  // namespace

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Date parse_date(std::string_view text) {
  if (text.size() != 10) {
    throw GrowError(ErrorCode::InvalidArgument, "malformed date: " + std::string(text));
  }
  expect_char(text, 4, '-');
  expect_char(text, 7, '-');
  const std::chrono::year_month_day ymd{std::chrono::year{read_int(text, 0, 4)},
                                        std::chrono::month{static_cast<unsigned>(read_int(text, 5, 2))},
                                        std::chrono::day{static_cast<unsigned>(read_int(text, 8, 2))}};
  if (!ymd.ok()) {
    throw GrowError(ErrorCode::InvalidArgument, "invalid calendar date: " + std::string(text));
  }
  return Date{ymd};
}

std::string format_timestamp(Timestamp t) {
  const Date day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return format_date(day) + buf;
}

Timestamp parse_timestamp(std::string_view text) {
  if (text.size() != 20 || text[10] != 'T' || text[19] != 'Z') {
    throw GrowError(ErrorCode::InvalidArgument, "malformed timestamp: " + std::string(text));
  }
  expect_char(text, 13, ':');
  expect_char(text, 16, ':');
  const Date day = parse_date(text.substr(0, 10));
  const int h = read_int(text, 11, 2);
  const int m = read_int(text, 14, 2);
  const int s = read_int(text, 17, 2);
  if (h > 23 || m > 59 || s > 59) {
    throw GrowError(ErrorCode::InvalidArgument, "invalid time of day: " + std::string(text));
  }
  return Timestamp{day} + std::chrono::hours{h} + std::chrono::minutes{m} + std::chrono::seconds{s};
}

Date local_date(Timestamp t, std::chrono::minutes utc_offset) {
  return std::chrono::floor<std::chrono::days>(t + utc_offset);
}

}  // namespace grow
