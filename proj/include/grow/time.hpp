#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace grow {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);

// "YYYY-MM-DD"
std::string format_date(Date d);
Date parse_date(std::string_view text);

// Calendar day of |t| in a zone that is |utc_offset| ahead of UTC.
Date local_date(Timestamp t, std::chrono::minutes utc_offset = std::chrono::minutes{0});

}  // namespace grow
