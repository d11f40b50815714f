#pragma once

#include <cstdint>
#include <string>

namespace panelfx {

/// Days since 1970-01-01 for an ISO "YYYY-MM-DD" string.
std::int64_t parse_date(const std::string& iso);

/// Inverse of parse_date.
std::string iso_date(std::int64_t day_code);

/// Calendar month key (year * 12 + month - 1) for a day code.
std::int64_t month_code(std::int64_t day_code);

} // namespace panelfx
