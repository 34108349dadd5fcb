#include "ecsim/engine.hpp"

#include "ecsim/detect.hpp"
#include "ecsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace ecsim {

namespace {

// Hours of the simulated day. Ordinary commerce happens during opening
// hours; institutional processing is pinned to the evening so that a day's
// deposits always reach the originator the same day.
constexpr int kGenesisHour = 0;
constexpr int kInjectHour = 8;
constexpr int kActivityHourLo = 8;
constexpr int kActivityHourHi = 21;
constexpr int kSpendHourLo = 9;
constexpr int kSpendHourHi = 21;
constexpr int kSweepHour = 22;
constexpr int kSettleHour = 23;

enum class PlanKind : std::uint8_t { normal, injection, sale, spend };

struct PlannedTx {
    int hour = 0;
    TxType type = TxType::purchase;
    EntityId payer = 0;
    EntityId payee = 0;
    Money amount = 0;
    PlanKind kind = PlanKind::normal;
};

struct StagedCmd {
    C3Command cmd;
    std::optional<Date> at_date;
    std::string on_alarm;
    int delay_days = 0;
    std::vector<int> member_segments;
    bool staged = false;
    int stage_on_day = -1;
};

class Engine {
public:
    Engine(const Scenario& sc, LedgerSink& sink)
        : sc_(sc), sink_(sink), eco_(Economy::build(sc)),
          merch_state_(sc.detection.merchants) {
        start_dow_ = day_of_week(sc_.start_date);
        cal_.holidays = sc_.holidays;

        for (const auto& p : eco_.entities())
            if (p.kind == EntityKind::merchant)
                merchant_ids_.push_back(p.id);
        first_merchant_id_ = merchant_ids_.empty() ? 0 : merchant_ids_.front();
        merchant_deposits_.assign(merchant_ids_.size(), {});
        merchant_first_active_.assign(merchant_ids_.size(), -1);
        today_merchant_deposits_.assign(merchant_ids_.size(), 0);

        for (int g = 0; g < sc_.segment_count(); ++g)
            pop_.emplace_back(sc_.seed, StreamKind::segment_population,
                              std::uint64_t(g));
        for (const auto& e : sc_.c3_script) {
            StagedCmd s;
            s.cmd = e.cmd;
            s.at_date = e.at_date;
            s.on_alarm = e.on_alarm;
            s.delay_days = e.delay_days;
            s.member_segments = e.member_segments;
            staged_.push_back(s);
            if (std::size_t(e.cmd.id) >= cmds_.size())
                cmds_.resize(std::size_t(e.cmd.id) + 1);
            cmds_[std::size_t(e.cmd.id)] = e.cmd;
        }
        member_active_cmds_.assign(eco_.member_count(), 0);

        if (sc_.attack.enabled) {
            attack_plan_ = attack_daily_plan(sc_.attack);
            attack_start_day_ = int((sc_.attack.start_date - sc_.start_date).count());
        }
    }

    RunResult run();

private:
    // --- identity helpers -------------------------------------------------

    const ConsumerSegmentCfg& cseg(const Purse& p) const {
        return sc_.consumers[std::size_t(p.segment_index) - sc_.members.size()];
    }
    const MerchantSegmentCfg& mseg(const Purse& p) const {
        return sc_.merchants[std::size_t(p.segment_index) - sc_.members.size() -
                             sc_.consumers.size()];
    }
    std::size_t merchant_slot(EntityId id) const {
        return std::size_t(id - first_merchant_id_);
    }

    RngStream& activity(EntityId id) {
        while (activity_.size() < id)
            activity_.emplace_back(sc_.seed, StreamKind::purse_activity,
                                   activity_.size() + 1);
        return activity_[std::size_t(id - 1)];
    }
    RngStream& misc(EntityId id) {
        while (misc_.size() < id)
            misc_.emplace_back(sc_.seed, StreamKind::engine_misc, misc_.size() + 1);
        return misc_[std::size_t(id - 1)];
    }
    RngStream& attack_stream(EntityId id) {
        auto it = attack_streams_.find(id);
        if (it == attack_streams_.end())
            it = attack_streams_
                     .emplace(id, RngStream(sc_.seed, StreamKind::attack, id))
                     .first;
        return it->second;
    }

    Money draw_amount(const AmountDist& a, RngStream& rs) {
        if (a.stddev <= 0.0) {
            const Money m = Money(std::llround(a.mean));
            return std::clamp(m, a.min, a.max);
        }
        if (a.min >= a.max)
            return a.min;
        const double x =
            rs.truncated_normal(a.mean, a.stddev, double(a.min), double(a.max));
        return std::clamp(Money(std::llround(x)), a.min, a.max);
    }

    // --- command distribution ---------------------------------------------

    std::uint64_t carrier_mask(const Purse& p) const {
        if (p.kind == EntityKind::member)
            return member_active_cmds_[std::size_t(p.id - 1)];
        if (p.compromised)
            return 0;
        return p.carried_commands;
    }

    void deliver(Purse& target, std::uint64_t incoming, EntityId source, int hour) {
        if (incoming == 0)
            return;
        if (target.kind == EntityKind::member) {
            // Members sync anything they see back into their own staging set.
            member_active_cmds_[std::size_t(target.id - 1)] |= incoming;
            return;
        }
        if (target.compromised)
            return;
        target.carried_commands |= incoming;
        std::uint64_t fresh = incoming & ~target.applied_commands;
        while (fresh) {
            const int id = __builtin_ctzll(fresh);
            const std::uint64_t bit = 1ULL << id;
            fresh &= ~bit;
            // Target match is immutable per purse, so a non-matching command
            // can be marked processed and never rechecked.
            target.applied_commands |= bit;
            const C3Command& cmd = cmds_[std::size_t(id)];
            if (!c3_targets(cmd, target))
                continue;
            const bool was_locked = target.locked;
            const std::uint32_t ev = apply_c3(target, cmd);
            TransactionRecord rec;
            rec.tx_id = ++tx_id_;
            rec.date = date_;
            rec.hour = hour;
            rec.type = TxType::c3_delivery;
            rec.payer_id = source;
            rec.payee_id = target.id;
            rec.payer_class = source == kOriginatorId ? -1 : eco_.entity(source).class_id;
            rec.payee_class = target.class_id;
            rec.amount = 0;
            rec.payer_balance_after =
                source == kOriginatorId ? 0 : eco_.entity(source).balance;
            rec.payee_balance_after = target.balance;
            rec.events = ev;
            rec.aux = cmd.id;
            sink_.record(rec);
            if (!was_locked && target.locked) {
                stats_.c3_locks++;
                ever_locked_.insert(target.id);
            }
        }
    }

    /// Any chip-to-chip or chip-to-member touch, successful or not, swaps
    /// carried command flags in both directions.
    void contact(EntityId a_id, EntityId b_id, int hour) {
        if (a_id == kOriginatorId || b_id == kOriginatorId)
            return;
        const std::uint64_t a_gives = carrier_mask(eco_.entity(a_id));
        const std::uint64_t b_gives = carrier_mask(eco_.entity(b_id));
        deliver(eco_.entity(a_id), b_gives, b_id, hour);
        deliver(eco_.entity(b_id), a_gives, a_id, hour);
    }

    // --- row emission -----------------------------------------------------

    void emit_row(TxType type, EntityId payer, EntityId payee, Money amount,
                  int hour, std::uint32_t events, Money aux, bool taint_flag) {
        TransactionRecord rec;
        rec.tx_id = ++tx_id_;
        rec.date = date_;
        rec.hour = hour;
        rec.type = type;
        rec.payer_id = payer;
        rec.payee_id = payee;
        rec.payer_class = payer == kOriginatorId ? -1 : eco_.entity(payer).class_id;
        rec.payee_class = payee == kOriginatorId ? -1 : eco_.entity(payee).class_id;
        rec.amount = amount;
        rec.payer_balance_after =
            payer == kOriginatorId ? 0 : eco_.entity(payer).balance;
        rec.payee_balance_after =
            payee == kOriginatorId ? 0 : eco_.entity(payee).balance;
        rec.events = events;
        rec.taint_flag = taint_flag;
        rec.aux = aux;
        sink_.record(rec);
    }

    /// One attempted transfer: contact first (commands may arrive and even
    /// lock a party), then authorize and settle. Returns true when value moved.
    bool attempt(EntityId payer, EntityId payee, TxType type, Money amount, int hour) {
        contact(payer, payee, hour);
        const ExecResult r = eco_.execute(payer, payee, type, amount);
        if (!r.ok) {
            DenialEvent d;
            d.date = date_;
            d.hour = hour;
            d.type = type;
            d.payer_id = payer;
            d.payee_id = payee;
            d.amount = amount;
            d.reason = r.reason;
            sink_.denial(d);
            ++denial_count_;
            return false;
        }
        emit_row(type, payer, payee, amount, hour, r.events, r.taint_moved,
                 r.taint_moved > 0);
        if (r.payee_locked_now) {
            stats_.ctl_locks++;
            ever_locked_.insert(payee);
        }
        if (type == TxType::deposit) {
            stats_.deposit_total = checked_add(stats_.deposit_total, amount);
            const Purse& p = eco_.entity(payer);
            if (p.kind == EntityKind::merchant)
                today_merchant_deposits_[merchant_slot(payer)] =
                    checked_add(today_merchant_deposits_[merchant_slot(payer)], amount);
        }
        return true;
    }

    /// Member-to-purse load; the member tops itself up from the originator
    /// for exactly the shortfall first.
    bool withdraw(EntityId purse_id, Money amount, int hour) {
        if (amount <= 0)
            return false;
        const EntityId member = eco_.entity(purse_id).home_member;
        const Money have = eco_.entity(member).balance;
        if (have < amount) {
            const Money shortfall = checked_sub(amount, have);
            eco_.issue(member, shortfall);
            emit_row(TxType::issuance, kOriginatorId, member, shortfall, hour,
                     ev_none, 0, false);
        }
        return attempt(member, purse_id, TxType::withdrawal, amount, hour);
    }

    void recustomize_purse(EntityId id, int hour) {
        Purse& p = eco_.entity(id);
        const Money pre = recustomize(p);
        emit_row(TxType::recustomization, id, id, 0, hour, ev_recustomized, pre,
                 false);
        stats_.recustomizations++;
    }

    // --- planning ----------------------------------------------------------

    double day_factor() const {
        double f = sc_.dow_factors[std::size_t(day_of_week(date_))];
        if (cal_.is_holiday(date_))
            f *= sc_.holiday_factor;
        return f;
    }

    EntityId pick_merchant(const Purse& c, RngStream& rs) {
        const auto& circ = circle_[std::size_t(c.id)];
        if (!circ.empty() && rs.uniform01() < cseg(c).in_circle_p)
            return circ[std::size_t(rs.uniform_int(0, std::int64_t(circ.size()) - 1))];
        return merchant_ids_[std::size_t(
            rs.uniform_int(0, std::int64_t(merchant_ids_.size()) - 1))];
    }

    EntityId pick_peer(const Purse& c, RngStream& rs) {
        // Uniform over live consumer purses other than the payer.
        for (int tries = 0; tries < 100; ++tries) {
            const std::size_t i = std::size_t(
                rs.uniform_int(0, std::int64_t(consumer_ids_.size()) - 1));
            const EntityId cand = consumer_ids_[i];
            if (cand != c.id && !eco_.dead(cand))
                return cand;
        }
        return 0;
    }

    void plan_consumer(const Purse& p, std::vector<PlannedTx>& plan) {
        const auto& seg = cseg(p);
        RngStream& rs = activity(p.id);
        const double f = day_factor();

        const std::int64_t n_buy = rs.poisson(seg.purchase.lambda * f);
        for (std::int64_t i = 0; i < n_buy; ++i) {
            PlannedTx t;
            t.type = TxType::purchase;
            t.payer = p.id;
            t.amount = draw_amount(seg.purchase.amount, rs);
            t.hour = int(rs.uniform_int(kActivityHourLo, kActivityHourHi));
            t.payee = pick_merchant(p, rs);
            plan.push_back(t);
        }
        const std::int64_t n_wd = rs.poisson(seg.withdrawal.lambda);
        for (std::int64_t i = 0; i < n_wd; ++i) {
            PlannedTx t;
            t.type = TxType::withdrawal;
            t.payer = p.home_member;
            t.payee = p.id;
            t.amount = draw_amount(seg.withdrawal.amount, rs);
            t.hour = int(rs.uniform_int(kActivityHourLo, kActivityHourHi));
            plan.push_back(t);
        }
        const std::int64_t n_c2c = rs.poisson(seg.peer_transfer.lambda * f);
        for (std::int64_t i = 0; i < n_c2c; ++i) {
            PlannedTx t;
            t.type = TxType::consumer_to_consumer;
            t.payer = p.id;
            t.amount = draw_amount(seg.peer_transfer.amount, rs);
            t.hour = int(rs.uniform_int(kActivityHourLo, kActivityHourHi));
            t.payee = pick_peer(p, rs);
            if (t.payee != 0)
                plan.push_back(t);
        }
        const std::int64_t n_dep = rs.poisson(seg.deposit.lambda);
        for (std::int64_t i = 0; i < n_dep; ++i) {
            PlannedTx t;
            t.type = TxType::deposit;
            t.payer = p.id;
            t.payee = p.home_member;
            t.amount = draw_amount(seg.deposit.amount, rs);
            t.hour = int(rs.uniform_int(kActivityHourLo, kActivityHourHi));
            plan.push_back(t);
        }
    }

    void plan_spend_burst(EntityId buyer, int hour_lo, int hour_hi,
                          std::vector<PlannedTx>& plan) {
        const Purse& b = eco_.entity(buyer);
        RngStream& rs = misc(buyer);
        const std::int64_t n = rs.poisson(sc_.attack.spend_lambda);
        for (std::int64_t i = 0; i < n; ++i) {
            PlannedTx t;
            t.kind = PlanKind::spend;
            t.type = TxType::purchase;
            t.payer = buyer;
            t.amount = draw_amount(sc_.attack.spend_amount, rs);
            t.hour = int(rs.uniform_int(hour_lo, hour_hi));
            t.payee = pick_merchant(b, rs);
            plan.push_back(t);
        }
    }

    void plan_attack(int d, std::vector<PlannedTx>& plan) {
        const AttackCfg& a = sc_.attack;
        if (!a.enabled)
            return;
        const int ad = d - attack_start_day_;
        const int spend_end = attack_start_day_ + int(attack_plan_.size()) +
                              a.spend_days_after;

        std::set<EntityId> selling_today; // buyers already served today

        if (ad >= 0 && ad < int(attack_plan_.size()) && attack_plan_[std::size_t(ad)] > 0) {
            // Live counterfeiters, id order.
            std::vector<EntityId> cfs;
            for (const auto& p : eco_.entities())
                if (p.segment_index == a.counterfeiter_segment && !eco_.dead(p.id))
                    cfs.push_back(p.id);
            if (!cfs.empty()) {
                // Buyer queue: repeat customers first, then fresh ones, both
                // in id order; locked purses are skipped up front.
                std::vector<EntityId> queue;
                for (const auto& p : eco_.entities())
                    if (p.segment_index == a.buyer_segment && !eco_.dead(p.id) &&
                        !p.locked && !p.compromised)
                        queue.push_back(p.id);
                std::stable_sort(queue.begin(), queue.end(),
                                 [&](EntityId x, EntityId y) {
                                     const int sx = sale_count(x), sy = sale_count(y);
                                     if (sx != sy)
                                         return sx > sy;
                                     return x < y;
                                 });
                std::size_t qi = 0;
                const Money quota = attack_plan_[std::size_t(ad)];
                for (std::size_t ci = 0; ci < cfs.size(); ++ci) {
                    Money share = quota / Money(cfs.size());
                    if (ci == 0)
                        share += quota % Money(cfs.size());
                    if (share <= 0)
                        continue;
                    PlannedTx inj;
                    inj.kind = PlanKind::injection;
                    inj.type = TxType::counterfeit_injection;
                    inj.payer = cfs[ci];
                    inj.payee = cfs[ci];
                    inj.amount = share;
                    inj.hour = kInjectHour;
                    plan.push_back(inj);

                    RngStream& rs = attack_stream(cfs[ci]);
                    Money remaining = share;
                    while (remaining > 0 && qi < queue.size()) {
                        Money batch = draw_amount(a.batch, rs);
                        if (batch > remaining)
                            batch = remaining; // the last batch absorbs the rest
                        const int hour =
                            int(rs.uniform_int(a.sale_hour_lo, a.sale_hour_hi));
                        const EntityId buyer = queue[qi++];
                        PlannedTx sale;
                        sale.kind = PlanKind::sale;
                        sale.type = TxType::consumer_to_consumer;
                        sale.payer = cfs[ci];
                        sale.payee = buyer;
                        sale.amount = batch;
                        sale.hour = hour;
                        plan.push_back(sale);
                        remaining -= batch;
                        selling_today.insert(buyer);
                        // Freshly bought value starts moving the same day.
                        if (a.spend_lambda > 0)
                            plan_spend_burst(buyer, std::min(hour + 1, 23), 23, plan);
                    }
                }
            }
        }

        // Earlier buyers keep spending through the laundering window.
        if (a.spend_lambda > 0 && d >= attack_start_day_ && d < spend_end) {
            for (const auto& [buyer, cnt] : sales_count_) {
                (void)cnt;
                if (eco_.dead(buyer) || selling_today.count(buyer))
                    continue;
                plan_spend_burst(buyer, kSpendHourLo, kSpendHourHi, plan);
            }
        }
    }

    int sale_count(EntityId id) const {
        auto it = sales_count_.find(id);
        return it == sales_count_.end() ? 0 : it->second;
    }

    // --- execution ---------------------------------------------------------

    void exec_planned(const PlannedTx& t) {
        if (t.payer != kOriginatorId && eco_.dead(t.payer))
            return;
        if (t.payee != kOriginatorId && eco_.dead(t.payee))
            return;
        switch (t.kind) {
        case PlanKind::injection: {
            const ExecResult r =
                eco_.execute(t.payer, t.payee, TxType::counterfeit_injection, t.amount);
            if (!r.ok)
                throw std::logic_error("counterfeit injection refused");
            emit_row(TxType::counterfeit_injection, t.payer, t.payee, t.amount,
                     t.hour, r.events, r.taint_moved, true);
            stats_.injected = checked_add(stats_.injected, t.amount);
            return;
        }
        case PlanKind::sale: {
            if (attempt(t.payer, t.payee, t.type, t.amount, t.hour)) {
                sales_count_[t.payee]++;
                stats_.sales++;
                stats_.counterfeit_sold = checked_add(stats_.counterfeit_sold, t.amount);
                counterfeit_sold_ = checked_add(counterfeit_sold_, t.amount);
            }
            return;
        }
        case PlanKind::spend: {
            const Purse& b = eco_.entity(t.payer);
            Money amt = t.amount;
            if (!b.locked || b.compromised)
                amt = std::min(amt, b.balance);
            if (amt <= 0)
                return;
            attempt(t.payer, t.payee, t.type, amt, t.hour);
            return;
        }
        case PlanKind::normal:
            break;
        }
        switch (t.type) {
        case TxType::purchase: {
            const Purse& p = eco_.entity(t.payer);
            if (p.balance < t.amount && !p.locked && p.kind == EntityKind::consumer) {
                // Stop at the counter only after topping up at the member.
                const auto& seg = cseg(p);
                Money want = std::max(checked_sub(t.amount, p.balance),
                                      draw_amount(seg.withdrawal.amount,
                                                  activity(p.id)));
                if (p.purse_limit > 0)
                    want = std::min(want, checked_sub(p.purse_limit, p.balance));
                if (want > 0)
                    withdraw(t.payer, want, t.hour);
            }
            if (attempt(t.payer, t.payee, TxType::purchase, t.amount, t.hour))
                maybe_refund(t.payer, t.payee, t.amount, t.hour);
            return;
        }
        case TxType::withdrawal: {
            const Purse& q = eco_.entity(t.payee);
            Money amt = t.amount;
            if (q.purse_limit > 0)
                amt = std::min(amt, checked_sub(q.purse_limit, q.balance));
            if (amt > 0)
                withdraw(t.payee, amt, t.hour);
            return;
        }
        case TxType::consumer_to_consumer: {
            const Purse& p = eco_.entity(t.payer);
            const Money amt = std::min(t.amount, p.balance);
            if (amt > 0)
                attempt(t.payer, t.payee, t.type, amt, t.hour);
            return;
        }
        case TxType::deposit: {
            const Purse& p = eco_.entity(t.payer);
            const Money amt = std::min(t.amount, p.balance);
            if (amt > 0)
                attempt(t.payer, t.payee, t.type, amt, t.hour);
            return;
        }
        default:
            throw std::logic_error("unplannable transaction type");
        }
    }

    void maybe_refund(EntityId consumer, EntityId merchant, Money amount, int hour) {
        const Purse& m = eco_.entity(merchant);
        const auto& seg = mseg(m);
        if (seg.refund_p <= 0.0)
            return;
        RngStream& rs = misc(merchant);
        if (rs.uniform01() >= seg.refund_p)
            return;
        const Money amt = Money(double(amount) * seg.refund_fraction);
        if (amt > 0)
            attempt(merchant, consumer, TxType::refund, amt, hour);
    }

    // --- day phases ----------------------------------------------------------

    void genesis() {
        for (const auto& p : eco_.entities()) {
            if (p.kind != EntityKind::consumer)
                continue;
            const auto& seg = cseg(p);
            RngStream& rs = pop_[std::size_t(p.segment_index)];
            assign_circle(p, rs, seg);
            Money bal = draw_amount(seg.initial_balance, rs);
            if (p.purse_limit > 0)
                bal = std::min(bal, p.purse_limit);
            if (bal > 0)
                withdraw(p.id, bal, kGenesisHour);
        }
    }

    void assign_circle(const Purse& p, RngStream& rs, const ConsumerSegmentCfg& seg) {
        std::vector<EntityId> pool;
        if (seg.circle_merchant_segment >= 0) {
            for (EntityId id : merchant_ids_)
                if (eco_.entity(id).segment_index == seg.circle_merchant_segment)
                    pool.push_back(id);
        } else {
            pool = merchant_ids_;
        }
        std::vector<EntityId> circ;
        const int want = std::min<int>(seg.circle_size, int(pool.size()));
        for (int i = 0; i < want; ++i) {
            for (int tries = 0; tries < 100; ++tries) {
                const EntityId cand = pool[std::size_t(
                    rs.uniform_int(0, std::int64_t(pool.size()) - 1))];
                if (std::find(circ.begin(), circ.end(), cand) == circ.end() ||
                    tries == 99) {
                    circ.push_back(cand);
                    break;
                }
            }
        }
        if (circle_.size() <= std::size_t(p.id))
            circle_.resize(std::size_t(p.id) + 1);
        circle_[std::size_t(p.id)] = std::move(circ);
    }

    void evolve_month() {
        const std::size_t n_member_segs = sc_.members.size();
        for (std::size_t si = 0; si < sc_.consumers.size(); ++si) {
            const auto& seg = sc_.consumers[si];
            const int g = int(n_member_segs + si);
            RngStream& rs = pop_[std::size_t(g)];
            if (seg.monthly_death_rate > 0.0) {
                // Collect ids first: deaths must not disturb iteration order.
                std::vector<EntityId> ids;
                for (const auto& p : eco_.entities())
                    if (p.segment_index == g && !eco_.dead(p.id))
                        ids.push_back(p.id);
                for (EntityId id : ids) {
                    if (rs.uniform01() >= seg.monthly_death_rate)
                        continue;
                    Purse& p = eco_.entity(id);
                    if (p.locked && !p.compromised)
                        recustomize_purse(id, kGenesisHour);
                    if (p.balance > 0)
                        attempt(id, p.home_member, TxType::deposit, p.balance,
                                kGenesisHour);
                    eco_.mark_dead(id);
                    stats_.deaths++;
                }
            }
            if (seg.monthly_birth_rate > 0.0) {
                std::int64_t alive = 0;
                for (const auto& p : eco_.entities())
                    if (p.segment_index == g && !eco_.dead(p.id))
                        ++alive;
                const std::int64_t births =
                    rs.poisson(seg.monthly_birth_rate * double(alive));
                for (std::int64_t i = 0; i < births; ++i) {
                    Purse np;
                    np.kind = EntityKind::consumer;
                    np.class_id = seg.class_id;
                    np.segment_index = g;
                    np.home_member = home_for(seg, rs);
                    np.purse_limit = seg.purse_limit;
                    np.ctl_limit = seg.ctl_limit;
                    np.compromised = seg.compromised;
                    const EntityId id = eco_.add_purse(np);
                    consumer_ids_.push_back(id);
                    const Purse& ref = eco_.entity(id);
                    assign_circle(ref, rs, seg);
                    Money bal = draw_amount(seg.initial_balance, rs);
                    if (seg.purse_limit > 0)
                        bal = std::min(bal, seg.purse_limit);
                    if (bal > 0)
                        withdraw(id, bal, kGenesisHour);
                    stats_.births++;
                }
            }
        }
    }

    EntityId home_for(const ConsumerSegmentCfg& seg, RngStream& rs) {
        std::vector<EntityId> homes;
        for (std::size_t i = 0; i < eco_.member_count(); ++i)
            if (eco_.entities()[i].segment_index == seg.member_segment)
                homes.push_back(eco_.entities()[i].id);
        return homes[std::size_t(rs.uniform_int(0, std::int64_t(homes.size()) - 1))];
    }

    void stage_due_commands(int d) {
        for (auto& s : staged_) {
            const bool due_date = s.at_date && *s.at_date == date_;
            const bool due_delay = s.stage_on_day == d;
            if (s.staged || !(due_date || due_delay))
                continue;
            stage_now(s);
        }
    }

    void stage_now(StagedCmd& s) {
        s.staged = true;
        for (std::size_t i = 0; i < eco_.member_count(); ++i) {
            const Purse& m = eco_.entities()[i];
            if (!s.member_segments.empty() &&
                std::find(s.member_segments.begin(), s.member_segments.end(),
                          m.segment_index) == s.member_segments.end())
                continue;
            member_active_cmds_[i] |= 1ULL << s.cmd.id;
        }
    }

    void end_of_day(int d, RunResult& out) {
        // Merchants bank the day's takings.
        for (EntityId id : merchant_ids_) {
            if (eco_.dead(id))
                continue;
            const Purse& m = eco_.entity(id);
            const Money amt = checked_sub(m.balance, mseg(m).deposit_float);
            if (amt > 0)
                attempt(id, m.home_member, TxType::deposit, amt, kSweepHour);
        }
        // Idle-channel member syncs.
        if (sc_.member_contact_rate > 0.0) {
            for (const auto& p : eco_.entities()) {
                if (p.kind == EntityKind::member || eco_.dead(p.id))
                    continue;
                if (misc(p.id).uniform01() < sc_.member_contact_rate)
                    contact(p.id, p.home_member, kSettleHour);
            }
        }
        // Owners of locked purses eventually turn them in for a reset.
        if (sc_.recustomize_on_lock_p > 0.0) {
            for (const auto& p : eco_.entities()) {
                if (p.kind == EntityKind::member || eco_.dead(p.id) || !p.locked ||
                    p.compromised)
                    continue;
                if (misc(p.id).uniform01() < sc_.recustomize_on_lock_p) {
                    recustomize_purse(p.id, kSettleHour);
                    contact(p.id, p.home_member, kSettleHour);
                }
            }
        }
        // Members return everything to the originator nightly.
        for (std::size_t i = 0; i < eco_.member_count(); ++i) {
            Purse& m = eco_.entities()[i];
            const Money bal = m.balance;
            if (bal <= 0)
                continue;
            const Money taint_retired = eco_.redeem(m.id, bal);
            emit_row(TxType::redemption, m.id, kOriginatorId, bal, kSettleHour,
                     ev_none, taint_retired, taint_retired > 0);
            stats_.redemption_total = checked_add(stats_.redemption_total, bal);
        }

        // Nightly audit: the books must close exactly, every day.
        const std::string err = eco_.conservation_error();
        if (!err.empty())
            throw std::logic_error("day " + format_date(date_) + ": " + err);

        // Feed the monitors.
        redemptions_.push_back(double(stats_.redemption_total));
        for (std::size_t slot = 0; slot < merchant_ids_.size(); ++slot) {
            merchant_deposits_[slot].push_back(double(today_merchant_deposits_[slot]));
            if (today_merchant_deposits_[slot] > 0 && merchant_first_active_[slot] < 0)
                merchant_first_active_[slot] = d;
        }
        if (sc_.detection.enabled) {
            bool currency_alarm = false;
            if (auto ev = evaluate_day(redemptions_, d, sc_.detection.currency, 0,
                                       start_dow_)) {
                if (ev->flagged) {
                    out.currency_flag_days.push_back(d);
                    currency_alarm = true;
                }
            }
            int flags = 0, evals = 0;
            for (std::size_t slot = 0; slot < merchant_ids_.size(); ++slot) {
                if (merchant_first_active_[slot] < 0)
                    continue;
                if (auto ev = evaluate_day(merchant_deposits_[slot], d,
                                           sc_.detection.merchants.base,
                                           merchant_first_active_[slot], start_dow_)) {
                    ++evals;
                    if (ev->flagged)
                        ++flags;
                }
            }
            const bool merchant_alarm = merch_state_.feed_day(flags, evals);
            if (merchant_alarm)
                out.merchant_alarm_days.push_back(d);
            // Alarm-conditioned command staging.
            for (auto& s : staged_) {
                if (s.staged || s.stage_on_day >= 0 || s.on_alarm.empty())
                    continue;
                const bool hit = (s.on_alarm == "currency" && currency_alarm) ||
                                 (s.on_alarm == "merchant" && merchant_alarm);
                if (!hit)
                    continue;
                if (s.delay_days <= 0)
                    stage_now(s);
                else
                    s.stage_on_day = d + s.delay_days;
            }
        }
    }

    // --- state --------------------------------------------------------------

    const Scenario& sc_;
    LedgerSink& sink_;
    Economy eco_;
    Calendar cal_;
    int start_dow_ = 0;
    Date date_{};

    std::vector<RngStream> activity_;
    std::vector<RngStream> misc_;
    std::vector<RngStream> pop_;
    std::map<EntityId, RngStream> attack_streams_;

    std::vector<EntityId> merchant_ids_;
    std::vector<EntityId> consumer_ids_;
    EntityId first_merchant_id_ = 0;
    std::vector<std::vector<EntityId>> circle_;

    std::vector<C3Command> cmds_;
    std::vector<StagedCmd> staged_;
    std::vector<std::uint64_t> member_active_cmds_;

    std::vector<Money> attack_plan_;
    int attack_start_day_ = -1;
    std::map<EntityId, int> sales_count_;
    Money counterfeit_sold_ = 0;
    std::set<EntityId> ever_locked_;

    std::vector<double> redemptions_;
    std::vector<std::vector<double>> merchant_deposits_;
    std::vector<int> merchant_first_active_;
    std::vector<Money> today_merchant_deposits_;
    MerchantSystemState merch_state_;

    std::uint64_t tx_id_ = 0;
    std::uint64_t denial_count_ = 0;
    DayStats stats_; // running stats for the current day
};

RunResult Engine::run() {
    RunResult out;
    out.header = make_header(sc_);

    for (const auto& p : eco_.entities())
        if (p.kind == EntityKind::consumer)
            consumer_ids_.push_back(p.id);

    date_ = sc_.start_date;
    int prev_month = month_of(date_);
    for (int d = 0; d < sc_.days; ++d) {
        stats_ = DayStats{};
        stats_.date = date_;
        std::fill(today_merchant_deposits_.begin(), today_merchant_deposits_.end(),
                  Money(0));

        if (d == 0)
            genesis();
        else if (month_of(date_) != prev_month)
            evolve_month();
        prev_month = month_of(date_);

        stage_due_commands(d);

        std::vector<PlannedTx> plan;
        plan_attack(d, plan);
        for (EntityId id : consumer_ids_) {
            if (eco_.dead(id))
                continue;
            const Purse& p = eco_.entity(id);
            plan_consumer(p, plan);
        }
        std::stable_sort(plan.begin(), plan.end(),
                         [](const PlannedTx& a, const PlannedTx& b) {
                             return a.hour < b.hour;
                         });
        for (const auto& t : plan)
            exec_planned(t);

        end_of_day(d, out);

        out.days.push_back(stats_);
        date_ = date_ + std::chrono::days{1};
    }

    out.redemptions = redemptions_;
    out.merchant_ids = merchant_ids_;
    out.merchant_deposits = merchant_deposits_;
    out.merchant_first_active = merchant_first_active_;
    out.buyers_total = int(sales_count_.size());
    for (const auto& [buyer, cnt] : sales_count_) {
        (void)cnt;
        if (eco_.entity(buyer).locked)
            out.buyers_locked_end++;
        if (ever_locked_.count(buyer))
            out.buyers_ever_locked++;
    }
    out.counterfeit_sold = counterfeit_sold_;
    out.totals = eco_.totals();
    out.record_count = tx_id_;
    out.denial_count = denial_count_;
    return out;
}

} // namespace

LedgerHeader make_header(const Scenario& sc) {
    LedgerHeader h;
    h.format_version = 1;
    h.scenario_name = sc.name;
    h.scenario_digest = sc.digest;
    h.seed = sc.seed;
    h.start_date = sc.start_date;
    h.days = sc.days;
    return h;
}

RunResult run_simulation(const Scenario& sc, LedgerSink& sink) {
    Engine e(sc, sink);
    return e.run();
}

} // namespace ecsim
