#include "ecsim/economy.hpp"

#include <stdexcept>

namespace ecsim {

Economy Economy::build(const Scenario& sc) {
    Economy e;
    e.matrix_ = sc.build_matrix();

    EntityId next_id = 1;
    int global_segment = 0;
    for (const auto& ms : sc.members) {
        for (int i = 0; i < ms.count; ++i) {
            Purse p;
            p.id = next_id++;
            p.kind = EntityKind::member;
            p.class_id = ms.class_id;
            p.segment_index = global_segment;
            p.home_member = p.id;
            e.purses_.push_back(p);
        }
        ++global_segment;
    }
    e.member_count_ = e.purses_.size();

    // Home members are dealt round-robin across the owning member segment.
    auto member_ids_of_segment = [&](int seg) {
        std::vector<EntityId> ids;
        for (std::size_t i = 0; i < e.member_count_; ++i)
            if (e.purses_[i].segment_index == seg)
                ids.push_back(e.purses_[i].id);
        return ids;
    };

    for (const auto& cs : sc.consumers) {
        auto homes = member_ids_of_segment(cs.member_segment);
        if (homes.empty())
            throw std::invalid_argument("consumer segment '" + cs.name +
                                        "' references a member segment with no members");
        for (int i = 0; i < cs.count; ++i) {
            Purse p;
            p.id = next_id++;
            p.kind = EntityKind::consumer;
            p.class_id = cs.class_id;
            p.segment_index = global_segment;
            p.home_member = homes[std::size_t(i) % homes.size()];
            p.purse_limit = cs.purse_limit;
            p.ctl_limit = cs.ctl_limit;
            p.compromised = cs.compromised;
            e.purses_.push_back(p);
        }
        ++global_segment;
    }
    for (const auto& ms : sc.merchants) {
        auto homes = member_ids_of_segment(ms.member_segment);
        if (homes.empty())
            throw std::invalid_argument("merchant segment '" + ms.name +
                                        "' references a member segment with no members");
        for (int i = 0; i < ms.count; ++i) {
            Purse p;
            p.id = next_id++;
            p.kind = EntityKind::merchant;
            p.class_id = ms.class_id;
            p.segment_index = global_segment;
            p.home_member = homes[std::size_t(i) % homes.size()];
            p.purse_limit = ms.purse_limit;
            p.ctl_limit = ms.ctl_limit;
            e.purses_.push_back(p);
        }
        ++global_segment;
    }
    e.dead_.assign(e.purses_.size(), 0);
    return e;
}

Purse& Economy::entity(EntityId id) {
    if (id == kOriginatorId || id > purses_.size())
        throw std::out_of_range("entity id " + std::to_string(id));
    return purses_[std::size_t(id - 1)];
}

const Purse& Economy::entity(EntityId id) const {
    if (id == kOriginatorId || id > purses_.size())
        throw std::out_of_range("entity id " + std::to_string(id));
    return purses_[std::size_t(id - 1)];
}

bool Economy::is_member(EntityId id) const {
    return id >= 1 && id <= member_count_;
}

EntityId Economy::add_purse(Purse p) {
    p.id = purses_.size() + 1;
    purses_.push_back(p);
    dead_.push_back(0);
    return p.id;
}

void Economy::issue(EntityId member, Money amount) {
    if (!is_member(member))
        throw std::invalid_argument("issuance target is not a member");
    Purse& m = entity(member);
    m.balance = checked_add(m.balance, amount);
    totals_.issued = checked_add(totals_.issued, amount);
}

Money Economy::redeem(EntityId member, Money amount) {
    if (!is_member(member))
        throw std::invalid_argument("redemption source is not a member");
    Purse& m = entity(member);
    if (m.balance < amount)
        throw std::invalid_argument("redemption exceeds member balance");
    const Money tm = m.taint == 0 ? 0 : mul_div_floor(amount, m.taint, m.balance);
    m.balance = checked_sub(m.balance, amount);
    m.taint = checked_sub(m.taint, tm);
    totals_.redeemed = checked_add(totals_.redeemed, amount);
    totals_.redeemed_taint = checked_add(totals_.redeemed_taint, tm);
    return tm;
}

ExecResult Economy::execute(EntityId payer, EntityId payee, TxType type, Money amount) {
    ExecResult r;
    Purse& p = entity(payer);
    Purse& q = entity(payee);
    if (auto deny = authorize(p, q, type, amount, matrix_)) {
        r.ok = false;
        r.reason = *deny;
        return r;
    }
    ApplyResult a = apply_transfer(p, q, type, amount);
    if (type == TxType::counterfeit_injection)
        totals_.injected = checked_add(totals_.injected, amount);
    r.ok = true;
    r.events = a.events;
    r.taint_moved = a.taint_moved;
    r.payee_locked_now = a.payee_locked_now;
    return r;
}

Money Economy::total_balance() const {
    Money sum = 0;
    for (const auto& p : purses_)
        sum = checked_add(sum, p.balance);
    return sum;
}

Money Economy::total_taint() const {
    Money sum = 0;
    for (const auto& p : purses_)
        sum = checked_add(sum, p.taint);
    return sum;
}

std::string Economy::conservation_error() const {
    const Money lhs = checked_add(totals_.issued, totals_.injected);
    const Money rhs = checked_add(total_balance(), totals_.redeemed);
    if (lhs != rhs)
        return "value books do not close: issued+injected=" + std::to_string(lhs) +
               " but balances+redeemed=" + std::to_string(rhs);
    const Money trhs = checked_add(total_taint(), totals_.redeemed_taint);
    if (totals_.injected != trhs)
        return "counterfeit books do not close: injected=" +
               std::to_string(totals_.injected) + " but held+retired=" +
               std::to_string(trhs);
    for (const auto& p : purses_) {
        if (p.balance < 0)
            return "negative balance on entity " + std::to_string(p.id);
        if (p.taint < 0 || p.taint > p.balance)
            return "taint outside [0,balance] on entity " + std::to_string(p.id);
    }
    return {};
}

} // namespace ecsim
