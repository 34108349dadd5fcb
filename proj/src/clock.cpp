#include "ecsim/clock.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace ecsim {

Date parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw std::invalid_argument("bad date '" + iso + "', expected yyyy-mm-dd");
    auto num = [&](int off, int len, int& out) {
        auto r = std::from_chars(iso.data() + off, iso.data() + off + len, out);
        return r.ec == std::errc{} && r.ptr == iso.data() + off + len;
    };
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d))
        throw std::invalid_argument("bad date '" + iso + "', expected yyyy-mm-dd");
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                    std::chrono::day{unsigned(d)}};
    if (!ymd.ok())
        throw std::invalid_argument("invalid calendar date '" + iso + "'");
    return std::chrono::sys_days{ymd};
}

std::string format_date(Date d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

int day_of_week(Date d) {
    std::chrono::weekday wd{d};
    return int(wd.iso_encoding()) - 1; // Monday=1..Sunday=7 -> 0..6
}

int month_of(Date d) {
    return int(unsigned(std::chrono::year_month_day{d}.month()));
}

int year_of(Date d) {
    return int(std::chrono::year_month_day{d}.year());
}

SimClock make_clock(Date start) {
    SimClock c;
    c.date = start;
    return c;
}

SimClock advance(const SimClock& c) {
    SimClock n = c;
    n.hour_index++;
    if (c.hour == 23) {
        n.hour = 0;
        n.date = c.date + std::chrono::days{1};
        n.day_index++;
        if (month_of(n.date) != month_of(c.date))
            n.month_index++;
    } else {
        n.hour = c.hour + 1;
    }
    return n;
}

SimClock advance_day(const SimClock& c) {
    SimClock n = c;
    for (int h = c.hour; h < 24; ++h)
        n = advance(n);
    return n;
}

} // namespace ecsim
