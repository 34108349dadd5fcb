#include "ecsim/detect.hpp"
#include "ecsim/engine.hpp"
#include "ecsim/ledger_io.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace ecsim;
using testutil::add_attack;
using testutil::small_scenario;

namespace {

struct IdLayout {
    std::set<EntityId> people, buyers, counterfeiters, shops;
};

// Ids are assigned sequentially: members, then consumer segments in
// declaration order, then merchants.
IdLayout layout_of(const Scenario& sc) {
    IdLayout l;
    EntityId next = 1;
    for (const auto& m : sc.members)
        next += EntityId(m.count);
    auto take = [&](std::set<EntityId>& dst, int count) {
        for (int i = 0; i < count; ++i)
            dst.insert(next++);
    };
    for (const auto& c : sc.consumers) {
        if (c.name == "people")
            take(l.people, c.count);
        else if (c.name == "buyers")
            take(l.buyers, c.count);
        else
            take(l.counterfeiters, c.count);
    }
    take(l.shops, sc.merchants[0].count);
    return l;
}

int day_index(const Scenario& sc, const TransactionRecord& r) {
    return int((r.date - sc.start_date).count());
}

} // namespace

TEST_CASE("identical seeds replay identical histories; different seeds diverge") {
    const Scenario sc = small_scenario(5, 25, 30, 5);
    CollectSink a, b;
    const RunResult ra = run_simulation(sc, a);
    const RunResult rb = run_simulation(sc, b);
    CHECK(a.records == b.records);
    CHECK(a.denials == b.denials);
    CHECK(ra.record_count == rb.record_count);
    CHECK(ra.redemptions == rb.redemptions);

    Scenario other = sc;
    other.seed = 6;
    CollectSink c;
    run_simulation(other, c);
    CHECK(a.records != c.records);
}

TEST_CASE("a finished run survives an independent replay of its own rows") {
    Scenario sc = small_scenario(11, 30, 30, 5);
    add_attack(sc, "1998-01-19", 6);
    CollectSink sink;
    const RunResult res = run_simulation(sc, sink);

    CHECK(res.record_count == sink.records.size());
    CHECK(res.denial_count == sink.denials.size());

    LedgerData ledger;
    ledger.header = make_header(sc);
    ledger.records = sink.records;
    const ReplayResult replay = replay_ledger(ledger);
    CHECK(replay.ok);
    CHECK(replay.error.empty());
    CHECK(replay.issued == res.totals.issued);
    CHECK(replay.injected == res.totals.injected);
    CHECK(replay.redeemed == res.totals.redeemed);
    CHECK(replay.redeemed_taint == res.totals.redeemed_taint);
}

TEST_CASE("the attack injects exactly on plan, and only there") {
    Scenario sc = small_scenario(21, 30, 30, 5);
    add_attack(sc, "1998-01-19", 6); // day 14
    const std::vector<Money> plan = attack_daily_plan(sc.attack);
    REQUIRE(plan.size() == 6);

    CollectSink sink;
    const RunResult res = run_simulation(sc, sink);
    const IdLayout ids = layout_of(sc);

    std::map<int, Money> per_day;
    for (const auto& r : sink.records)
        if (r.type == TxType::counterfeit_injection) {
            per_day[day_index(sc, r)] += r.amount;
            CHECK(r.payer_id == r.payee_id);
            CHECK(r.taint_flag);
            CHECK(ids.counterfeiters.count(r.payee_id) == 1);
        }

    Money planned_total = 0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const int d = 14 + int(i);
        planned_total += plan[i];
        CHECK(per_day[d] == plan[i]);
        CHECK(res.days[std::size_t(d)].injected == plan[i]);
        per_day.erase(d);
    }
    CHECK(per_day.empty()); // nothing outside the attack window
    CHECK(res.totals.injected == planned_total);
}

TEST_CASE("buyer accounting matches what the ledger shows") {
    Scenario sc = small_scenario(22, 30, 30, 5);
    add_attack(sc, "1998-01-19", 6);
    CollectSink sink;
    const RunResult res = run_simulation(sc, sink);
    const IdLayout ids = layout_of(sc);

    // A sale is the only reason a counterfeiter ever pays anyone.
    std::set<EntityId> bought;
    std::set<EntityId> locked;
    Money sold = 0;
    for (const auto& r : sink.records) {
        if (r.type == TxType::consumer_to_consumer &&
            ids.counterfeiters.count(r.payer_id)) {
            bought.insert(r.payee_id);
            sold += r.amount;
            CHECK(ids.buyers.count(r.payee_id) == 1);
        }
        if (r.events & ev_ctl_exceeded)
            locked.insert(r.payee_id);
    }

    CHECK(res.buyers_total == int(bought.size()));
    CHECK(res.counterfeit_sold == sold);

    std::set<EntityId> locked_buyers;
    for (EntityId id : bought)
        if (locked.count(id))
            locked_buyers.insert(id);
    CHECK(res.buyers_ever_locked == int(locked_buyers.size()));
    // No re-customization and no unlock command in this run, so a tripped
    // lock is permanent.
    CHECK(res.buyers_locked_end == res.buyers_ever_locked);
    CHECK(res.buyers_ever_locked >= 5);
    CHECK(res.buyers_total <= int(ids.buyers.size()));
}

TEST_CASE("a staged lock command spreads chip to chip") {
    Scenario sc = small_scenario(31, 40, 40, 6);
    add_attack(sc, "1998-01-12", 6);
    // Give the honest segment unlimited turnover so every lock observed on it
    // is attributable to the command, not to an autonomous trip.
    sc.consumers[0].ctl_limit = 0;

    C3ScriptEntry lock_people;
    lock_people.cmd.id = 0;
    lock_people.cmd.action = C3Action::lock;
    lock_people.cmd.target_kind = C3TargetKind::by_segment;
    lock_people.cmd.target = sc.segment_index("people");
    lock_people.at_date = parse_date("1998-01-26"); // day 21
    sc.c3_script = {lock_people};

    CollectSink sink;
    const RunResult res = run_simulation(sc, sink);
    const IdLayout ids = layout_of(sc);

    std::set<EntityId> reached;
    std::set<int> delivery_days;
    int lock_events = 0;
    for (const auto& r : sink.records)
        if (r.type == TxType::c3_delivery) {
            CHECK(r.amount == 0);
            CHECK(r.aux == 0); // command id
            CHECK((r.events & ev_c3_applied) != 0);
            CHECK(day_index(sc, r) >= 21);
            // Only matching chips produce a delivery row, and compromised
            // chips never accept commands at all.
            CHECK(ids.people.count(r.payee_id) == 1);
            reached.insert(r.payee_id);
            delivery_days.insert(day_index(sc, r));
            if (r.events & ev_purse_locked)
                ++lock_events;
        }

    // Epidemic, not broadcast: arrival is spread over several days...
    CHECK(delivery_days.size() >= 3);
    // ...but member syncs plus purse-to-purse contact reach nearly everyone.
    CHECK(reached.size() >= ids.people.size() * 9 / 10);
    CHECK(lock_events == int(reached.size())); // first delivery locks

    int c3_locks = 0;
    for (const auto& day : res.days)
        c3_locks += day.c3_locks;
    CHECK(c3_locks == lock_events);

    // Locked holders keep bumping into chips and tills; those touches are
    // refused but still logged.
    bool denied_after_lock = false;
    for (const auto& d : sink.denials)
        if (d.reason == DenyReason::purse_locked &&
            ids.people.count(d.payer_id) &&
            int((d.date - sc.start_date).count()) > 21)
            denied_after_lock = true;
    CHECK(denied_after_lock);
}

TEST_CASE("re-customization rows carry the pre-reset turnover counter") {
    Scenario sc = small_scenario(41, 30, 30, 5);
    add_attack(sc, "1998-01-15", 6); // day 10
    sc.recustomize_on_lock_p = 0.5;

    CollectSink sink;
    const RunResult res = run_simulation(sc, sink);

    int rows = 0;
    for (const auto& r : sink.records)
        if (r.type == TxType::recustomization) {
            ++rows;
            CHECK(r.amount == 0);
            CHECK(r.payer_id == r.payee_id);
            CHECK(r.events == ev_recustomized);
            CHECK(r.aux > 0); // the counter that tripped the lock
        }
    CHECK(rows >= 1);

    int stat = 0;
    for (const auto& day : res.days)
        stat += day.recustomizations;
    CHECK(stat == rows);

    // Unlocked buyers go on buying, so some lock a second time.
    CHECK(res.buyers_ever_locked >= res.buyers_locked_end);
}

TEST_CASE("births and deaths keep the books closed") {
    Scenario sc = small_scenario(77, 70, 50, 5);
    sc.consumers[0].monthly_birth_rate = 0.2;
    sc.consumers[0].monthly_death_rate = 0.2;

    CollectSink sink;
    const RunResult res = run_simulation(sc, sink);

    int births = 0, deaths = 0;
    for (const auto& day : res.days) {
        births += day.births;
        deaths += day.deaths;
    }
    CHECK(births > 0);
    CHECK(deaths > 0);

    LedgerData ledger;
    ledger.header = make_header(sc);
    ledger.records = sink.records;
    const ReplayResult replay = replay_ledger(ledger);
    CHECK(replay.ok);
    CHECK(checked_add(replay.issued, replay.injected) ==
          checked_add(replay.final_balance_total, replay.redeemed));
}

TEST_CASE("in-run monitors agree with the offline detector, day by day") {
    Scenario sc = small_scenario(9, 60, 60, 8);
    add_attack(sc, "1998-02-23", 6); // day 49
    sc.detection.enabled = true;
    sc.detection.currency = {DetectWindow::weekly, 4.0, false, DetectDomain::linear};
    sc.detection.merchants.base = {DetectWindow::weekly, 3.0, false, DetectDomain::log};
    sc.detection.merchants.system_k = 3.0;
    sc.detection.merchants.p_hat_floor = 0.02;

    CollectSink sink;
    const RunResult res = run_simulation(sc, sink);
    const int start_dow = day_of_week(sc.start_date);

    const SeriesResult cur =
        detect_series(res.redemptions, sc.detection.currency, 0, start_dow);
    CHECK(res.currency_flag_days == cur.flagged_days());
    CHECK_FALSE(res.currency_flag_days.empty()); // the flood is unmistakable

    const MerchantSystemResult merch =
        detect_merchants(res.merchant_deposits, sc.detection.merchants,
                         res.merchant_first_active, start_dow);
    CHECK(res.merchant_alarm_days == merch.alarm_days());
}

TEST_CASE("a run shorter than one window stays silent") {
    Scenario sc = small_scenario(3, 7, 20, 3);
    sc.detection.enabled = true;
    sc.detection.currency = {DetectWindow::weekly, 4.0, false, DetectDomain::linear};
    sc.detection.merchants.base = {DetectWindow::weekly, 3.0, false, DetectDomain::log};

    CollectSink sink;
    const RunResult res = run_simulation(sc, sink);
    CHECK(res.currency_flag_days.empty());
    CHECK(res.merchant_alarm_days.empty());

    const SeriesResult cur = detect_series(res.redemptions, sc.detection.currency,
                                           0, day_of_week(sc.start_date));
    for (char e : cur.evaluated)
        CHECK(!e);
}
