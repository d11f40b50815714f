#include "panelfx/dates.hpp"

#include "panelfx/errors.hpp"

#include <chrono>
#include <cstdio>

namespace panelfx {

std::int64_t parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    int n = std::sscanf(iso.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail);
    if (n != 3 || m < 1 || m > 12 || d < 1 || d > 31)
        throw ValidationError("bad date '" + iso + "' (expected YYYY-MM-DD)");
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                    std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) throw ValidationError("bad calendar date '" + iso + "'");
    return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::string iso_date(std::int64_t day_code) {
    std::chrono::year_month_day ymd{
        std::chrono::sys_days{std::chrono::days{day_code}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

std::int64_t month_code(std::int64_t day_code) {
    std::chrono::year_month_day ymd{
        std::chrono::sys_days{std::chrono::days{day_code}}};
    return std::int64_t(int(ymd.year())) * 12 + (unsigned(ymd.month()) - 1);
}

} // namespace panelfx
