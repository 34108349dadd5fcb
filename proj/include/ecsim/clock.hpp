#ifndef ECSIM_CLOCK_HPP
#define ECSIM_CLOCK_HPP

#include <chrono>
#include <cstdint>
#include <set>
#include <string>

namespace ecsim {

using Date = std::chrono::sys_days;

Date parse_date(const std::string& iso);       // "1998-04-01"; throws std::invalid_argument
std::string format_date(Date d);               // ISO yyyy-mm-dd
int day_of_week(Date d);                       // 0 = Monday .. 6 = Sunday
int month_of(Date d);                          // 1..12
int year_of(Date d);

// Simulation clock over the three nested periods: month / day / hour.
// Period indices count boundaries crossed since the run start.
struct SimClock {
    Date date{};
    int hour = 0;            // 0..23
    int day_index = 0;       // secondary period
    int month_index = 0;     // primary period
    int hour_index = 0;      // tertiary period, hours since start

    bool operator==(const SimClock&) const = default;
};

SimClock make_clock(Date start);

// One hour forward; rolls the day and month boundaries and keeps the
// period indices consistent.
SimClock advance(const SimClock& c);

// Day-level step used by the engine loop (equivalent to 24 advances).
SimClock advance_day(const SimClock& c);

struct Calendar {
    std::set<Date> holidays;
    bool is_holiday(Date d) const { return holidays.count(d) > 0; }
};

} // namespace ecsim

#endif
