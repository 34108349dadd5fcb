#include "ecsim/purse.hpp"

#include <stdexcept>

namespace ecsim {

std::uint64_t ClassMatrix::key(int payer_class, int payee_class, TxType type) {
    return (std::uint64_t(std::uint32_t(payer_class)) << 40) |
           (std::uint64_t(std::uint32_t(payee_class)) << 8) |
           std::uint64_t(std::uint8_t(type));
}

void ClassMatrix::allow(int payer_class, int payee_class, TxType type) {
    allowed_.insert(key(payer_class, payee_class, type));
}

bool ClassMatrix::allows(int payer_class, int payee_class, TxType type) const {
    return allowed_.count(key(payer_class, payee_class, type)) != 0;
}

const char* to_string(C3Action a) {
    switch (a) {
    case C3Action::lock: return "lock";
    case C3Action::unlock: return "unlock";
    case C3Action::set_ctl_limit: return "set_ctl_limit";
    case C3Action::set_purse_limit: return "set_purse_limit";
    case C3Action::reset_counters: return "reset_counters";
    }
    throw std::logic_error("unknown C3Action");
}

C3Action c3_action_from_string(const std::string& s) {
    if (s == "lock") return C3Action::lock;
    if (s == "unlock") return C3Action::unlock;
    if (s == "set_ctl_limit") return C3Action::set_ctl_limit;
    if (s == "set_purse_limit") return C3Action::set_purse_limit;
    if (s == "reset_counters") return C3Action::reset_counters;
    throw std::invalid_argument("unknown command action '" + s + "'");
}

bool c3_targets(const C3Command& cmd, const Purse& p) {
    if (p.kind == EntityKind::member)
        return false;
    switch (cmd.target_kind) {
    case C3TargetKind::all_purses: return true;
    case C3TargetKind::by_class: return p.class_id == cmd.target;
    case C3TargetKind::by_segment: return p.segment_index == cmd.target;
    case C3TargetKind::by_purse_id: return p.id == std::uint64_t(cmd.target);
    }
    return false;
}

std::uint32_t apply_c3(Purse& p, const C3Command& cmd) {
    std::uint32_t ev = ev_c3_applied;
    switch (cmd.action) {
    case C3Action::lock:
        if (!p.locked) {
            p.locked = true;
            ev |= ev_purse_locked;
        }
        break;
    case C3Action::unlock:
        p.locked = false;
        break;
    case C3Action::set_ctl_limit:
        p.ctl_limit = cmd.param;
        break;
    case C3Action::set_purse_limit:
        p.purse_limit = cmd.param;
        break;
    case C3Action::reset_counters:
        p.ctl_accum = 0;
        break;
    }
    p.applied_commands |= 1ULL << cmd.id;
    return ev;
}

std::optional<DenyReason> authorize(const Purse& payer, const Purse& payee,
                                    TxType type, Money amount,
                                    const ClassMatrix& matrix) {
    if (amount <= 0)
        throw std::invalid_argument("transfer amount must be positive");
    // Value fabrication is a malfunction of the compromised chip itself; it
    // bypasses the two-chip protocol entirely.
    if (type == TxType::counterfeit_injection) {
        if (!payee.compromised)
            return DenyReason::class_not_allowed;
        return std::nullopt;
    }
    if (payer.locked && !payer.compromised)
        return DenyReason::purse_locked;
    if (payee.locked && !payee.compromised)
        return DenyReason::payee_locked;
    // Each honest chip checks the class matrix; one honest side suffices.
    if (!(payer.compromised && payee.compromised) &&
        !matrix.allows(payer.class_id, payee.class_id, type))
        return DenyReason::class_not_allowed;
    if (payer.balance < amount)
        return DenyReason::insufficient_funds;
    if (!payee.compromised && payee.purse_limit > 0 &&
        checked_add(payee.balance, amount) > payee.purse_limit)
        return DenyReason::purse_limit;
    return std::nullopt;
}

bool counts_toward_ctl(TxType type) {
    switch (type) {
    case TxType::purchase:
    case TxType::refund:
    case TxType::consumer_to_consumer:
        return true;
    default:
        return false;
    }
}

ApplyResult apply_transfer(Purse& payer, Purse& payee, TxType type, Money amount) {
    ApplyResult r;
    if (type == TxType::counterfeit_injection) {
        payee.balance = checked_add(payee.balance, amount);
        payee.taint = checked_add(payee.taint, amount);
        r.taint_moved = amount;
        return r;
    }
    // Counterfeit value travels pro rata with the payment; the remainder of
    // the integer division stays with the payer, so no value or taint is
    // created or destroyed.
    const Money taint_moved =
        payer.taint == 0 ? 0 : mul_div_floor(amount, payer.taint, payer.balance);
    payer.balance = checked_sub(payer.balance, amount);
    payer.taint = checked_sub(payer.taint, taint_moved);
    payee.balance = checked_add(payee.balance, amount);
    payee.taint = checked_add(payee.taint, taint_moved);
    r.taint_moved = taint_moved;

    if (counts_toward_ctl(type) && !payee.compromised && payee.ctl_limit > 0) {
        const bool was_over = payee.ctl_accum > payee.ctl_limit;
        payee.ctl_accum = checked_add(payee.ctl_accum, amount);
        if (!was_over && payee.ctl_accum > payee.ctl_limit && !payee.locked) {
            // The crossing transfer completes; the chip locks itself after.
            payee.locked = true;
            r.events |= ev_ctl_exceeded | ev_purse_locked;
            r.payee_locked_now = true;
        }
    }
    return r;
}

Money recustomize(Purse& p) {
    const Money pre = p.ctl_accum;
    p.ctl_accum = 0;
    p.locked = false;
    p.applied_commands = 0;
    p.carried_commands = 0;
    p.recustomization_count++;
    return pre;
}

} // namespace ecsim
