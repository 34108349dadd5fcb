#pragma once

#include "ecsim/money.hpp"
#include "ecsim/record.hpp"

#include <cstdint>
#include <optional>
#include <unordered_set>

namespace ecsim {

/// Which (payer class, payee class, transaction type) triples chips accept.
/// Both chips in a protocol run enforce this; anything not listed is refused
/// with class_not_allowed.
class ClassMatrix {
public:
    void allow(int payer_class, int payee_class, TxType type);
    bool allows(int payer_class, int payee_class, TxType type) const;
    std::size_t size() const { return allowed_.size(); }

private:
    static std::uint64_t key(int payer_class, int payee_class, TxType type);
    std::unordered_set<std::uint64_t> allowed_;
};

/// What an entity is. Member accounts reuse the purse state block (balance,
/// taint, carried commands) but are host accounts, not chips: commands never
/// target them and they have no limits.
enum class EntityKind : std::uint8_t { member, consumer, merchant };

/// Chip-resident state of one purse. Balance and risk counters live on the
/// card; everything here is what the card itself knows.
struct Purse {
    EntityId id = 0;
    EntityKind kind = EntityKind::consumer;
    int class_id = 0;
    int segment_index = 0;
    EntityId home_member = 0;

    Money balance = 0;
    Money taint = 0; // counterfeit fraction of balance, exact integer

    /// Maximum balance the chip will accept (0 = unlimited).
    Money purse_limit = 0;
    /// Credit turnover limit: cumulative peer-received value that trips the
    /// autonomous lock (0 = disabled).
    Money ctl_limit = 0;
    /// Value received from non-member sources since last reset.
    Money ctl_accum = 0;

    bool locked = false;
    /// A compromised chip ignores its own limits, lock state and commands;
    /// honest counterparties still enforce theirs.
    bool compromised = false;

    /// Remote-command flags carried / already executed (bit = command id).
    std::uint64_t carried_commands = 0;
    std::uint64_t applied_commands = 0;

    std::uint64_t recustomization_count = 0;
};

/// Remote management command, delivered chip-to-chip.
enum class C3Action : std::uint8_t {
    lock,
    unlock,
    set_ctl_limit,
    set_purse_limit,
    reset_counters,
};

const char* to_string(C3Action a);
C3Action c3_action_from_string(const std::string& s);

/// How a command selects its target chips.
enum class C3TargetKind : std::uint8_t {
    all_purses,
    by_class,
    by_segment,
    by_purse_id,
};

struct C3Command {
    int id = 0; // 0..63, used as a bit position on chips
    C3Action action = C3Action::lock;
    C3TargetKind target_kind = C3TargetKind::all_purses;
    std::int64_t target = 0; // class id, segment index or purse id
    Money param = 0;         // new limit for set_* actions
};

bool c3_targets(const C3Command& cmd, const Purse& p);

/// Executes a command on a chip (caller has checked targeting/applied bits).
/// Returns the events observed.
std::uint32_t apply_c3(Purse& p, const C3Command& cmd);

/// Decide whether a transfer attempt is accepted by both chips.
/// `payee_is_member` relaxes purse-side receive checks (member accounts are
/// not chips). Returns nullopt when accepted.
std::optional<DenyReason> authorize(const Purse& payer, const Purse& payee,
                                    TxType type, Money amount,
                                    const ClassMatrix& matrix);

struct ApplyResult {
    std::uint32_t events = ev_none;
    Money taint_moved = 0;
    bool payee_locked_now = false;
};

/// Settle an authorized transfer: move balance, move the proportional share
/// of counterfeit value, accumulate the payee's turnover counter and trip the
/// autonomous lock if this transfer crossed the limit. The crossing transfer
/// itself completes; the lock takes effect afterwards.
ApplyResult apply_transfer(Purse& payer, Purse& payee, TxType type, Money amount);

/// True when receipts of this type count against the payee's turnover limit
/// (peer sources only; loads from a member and issuer flows do not count).
bool counts_toward_ctl(TxType type);

/// Reset the chip's risk counters and unlock it (new identity, same balance).
/// Returns the pre-reset turnover accumulator for audit.
Money recustomize(Purse& p);

} // namespace ecsim
