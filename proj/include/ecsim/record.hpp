#pragma once

#include "ecsim/clock.hpp"
#include "ecsim/money.hpp"

#include <cstdint>
#include <string>

namespace ecsim {

using EntityId = std::uint64_t;

/// The originator (currency issuer) is a fixed well-known entity.
inline constexpr EntityId kOriginatorId = 0;

enum class TxType : std::uint8_t {
    issuance,             // originator -> member
    redemption,           // member -> originator
    withdrawal,           // member -> consumer purse (load)
    deposit,              // merchant/consumer purse -> member
    purchase,             // consumer -> merchant
    refund,               // merchant -> consumer
    consumer_to_consumer, // purse-to-purse transfer
    counterfeit_injection,// value created on a compromised purse
    recustomization,      // counters reset / identity refresh, zero value
    c3_delivery,          // command reached a chip, zero value
};

const char* to_string(TxType t);
TxType tx_type_from_string(const std::string& s);

/// True for types that move balance between two purses/accounts.
bool moves_value(TxType t);

/// On-chip events observed while processing a transaction, packed as flags.
enum OnChipEvent : std::uint32_t {
    ev_none = 0,
    ev_ctl_exceeded = 1u << 0,
    ev_purse_locked = 1u << 1,
    ev_recustomized = 1u << 2,
    ev_c3_applied = 1u << 3,
};

std::string events_to_string(std::uint32_t events);
std::uint32_t events_from_string(const std::string& s);

/// One ledger row. Balances are captured after the transfer applied, so a
/// replay can be checked position by position.
struct TransactionRecord {
    std::uint64_t tx_id = 0;
    Date date{};
    int hour = 0;
    TxType type = TxType::purchase;
    EntityId payer_id = 0;
    EntityId payee_id = 0;
    int payer_class = 0;
    int payee_class = 0;
    Money amount = 0;
    Money payer_balance_after = 0;
    Money payee_balance_after = 0;
    std::uint32_t events = ev_none;
    bool taint_flag = false; // payer carried counterfeit value when paying
    Money aux = 0;           // type-specific extra (pre-reset counter, etc.)

    bool operator==(const TransactionRecord&) const = default;
};

/// Reasons an attempted transaction is refused by a chip.
enum class DenyReason : std::uint8_t {
    purse_locked,
    payee_locked,
    class_not_allowed,
    purse_limit,
    insufficient_funds,
    ctl_locked, // lock tripped by this very transaction's predecessor state
};

const char* to_string(DenyReason r);
DenyReason deny_reason_from_string(const std::string& s);

/// A refused attempt. Not value-moving; logged separately from the ledger.
struct DenialEvent {
    Date date{};
    int hour = 0;
    TxType type = TxType::purchase;
    EntityId payer_id = 0;
    EntityId payee_id = 0;
    Money amount = 0;
    DenyReason reason = DenyReason::purse_locked;

    bool operator==(const DenialEvent&) const = default;
};

} // namespace ecsim
