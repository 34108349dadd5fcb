#include "ecsim/record.hpp"

#include <stdexcept>
#include <vector>

namespace ecsim {

const char* to_string(TxType t) {
    switch (t) {
    case TxType::issuance: return "issuance";
    case TxType::redemption: return "redemption";
    case TxType::withdrawal: return "withdrawal";
    case TxType::deposit: return "deposit";
    case TxType::purchase: return "purchase";
    case TxType::refund: return "refund";
    case TxType::consumer_to_consumer: return "consumer_to_consumer";
    case TxType::counterfeit_injection: return "counterfeit_injection";
    case TxType::recustomization: return "recustomization";
    case TxType::c3_delivery: return "c3_delivery";
    }
    throw std::logic_error("unknown TxType");
}

TxType tx_type_from_string(const std::string& s) {
    static const std::vector<TxType> all = {
        TxType::issuance,      TxType::redemption,
        TxType::withdrawal,    TxType::deposit,
        TxType::purchase,      TxType::refund,
        TxType::consumer_to_consumer, TxType::counterfeit_injection,
        TxType::recustomization, TxType::c3_delivery,
    };
    for (TxType t : all)
        if (s == to_string(t))
            return t;
    throw std::invalid_argument("unknown transaction type '" + s + "'");
}

bool moves_value(TxType t) {
    switch (t) {
    case TxType::recustomization:
    case TxType::c3_delivery:
        return false;
    default:
        return true;
    }
}

std::string events_to_string(std::uint32_t events) {
    if (events == ev_none)
        return "-";
    std::string out;
    auto add = [&](std::uint32_t bit, const char* name) {
        if (events & bit) {
            if (!out.empty())
                out += ',';
            out += name;
        }
    };
    add(ev_ctl_exceeded, "ctl_exceeded");
    add(ev_purse_locked, "purse_locked");
    add(ev_recustomized, "recustomized");
    add(ev_c3_applied, "c3_applied");
    return out;
}

std::uint32_t events_from_string(const std::string& s) {
    if (s.empty() || s == "-")
        return ev_none;
    std::uint32_t out = ev_none;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos);
        if (tok == "ctl_exceeded")
            out |= ev_ctl_exceeded;
        else if (tok == "purse_locked")
            out |= ev_purse_locked;
        else if (tok == "recustomized")
            out |= ev_recustomized;
        else if (tok == "c3_applied")
            out |= ev_c3_applied;
        else
            throw std::invalid_argument("unknown chip event '" + tok + "'");
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

const char* to_string(DenyReason r) {
    switch (r) {
    case DenyReason::purse_locked: return "purse_locked";
    case DenyReason::payee_locked: return "payee_locked";
    case DenyReason::class_not_allowed: return "class_not_allowed";
    case DenyReason::purse_limit: return "purse_limit";
    case DenyReason::insufficient_funds: return "insufficient_funds";
    case DenyReason::ctl_locked: return "ctl_locked";
    }
    throw std::logic_error("unknown DenyReason");
}

DenyReason deny_reason_from_string(const std::string& s) {
    static const std::vector<DenyReason> all = {
        DenyReason::purse_locked,  DenyReason::payee_locked,
        DenyReason::class_not_allowed, DenyReason::purse_limit,
        DenyReason::insufficient_funds, DenyReason::ctl_locked,
    };
    for (DenyReason r : all)
        if (s == to_string(r))
            return r;
    throw std::invalid_argument("unknown denial reason '" + s + "'");
}

} // namespace ecsim
