#pragma once

#include "ecsim/economy.hpp"
#include "ecsim/ledger_io.hpp"
#include "ecsim/scenario.hpp"

#include <vector>

namespace ecsim {

/// Aggregates kept per simulated day.
struct DayStats {
    Date date{};
    Money redemption_total = 0;
    Money deposit_total = 0;
    Money injected = 0;
    Money counterfeit_sold = 0;
    int sales = 0;
    int ctl_locks = 0;
    int c3_locks = 0;
    int recustomizations = 0;
    int births = 0;
    int deaths = 0;
};

struct RunResult {
    LedgerHeader header;
    std::vector<DayStats> days;

    /// Daily series as the in-run monitors saw them.
    std::vector<double> redemptions;
    std::vector<EntityId> merchant_ids; // slot -> entity id
    std::vector<std::vector<double>> merchant_deposits; // [slot][day]
    std::vector<int> merchant_first_active; // -1 = never deposited

    /// Days (0-based) on which the in-run monitors raised.
    std::vector<int> currency_flag_days;
    std::vector<int> merchant_alarm_days;

    /// Counterfeit containment.
    int buyers_total = 0;       // distinct purses that bought counterfeit value
    int buyers_locked_end = 0;  // of those, locked when the run ended
    int buyers_ever_locked = 0;
    Money counterfeit_sold = 0;

    EconomyTotals totals;
    std::uint64_t record_count = 0;
    std::uint64_t denial_count = 0;
};

LedgerHeader make_header(const Scenario& sc);

/// Run a scenario end to end, streaming every transaction into `sink`.
/// Throws std::logic_error if a nightly conservation check ever fails and
/// std::runtime_error on configuration problems that only surface at run
/// time (e.g. a truncated draw with no mass in range).
RunResult run_simulation(const Scenario& sc, LedgerSink& sink);

} // namespace ecsim
