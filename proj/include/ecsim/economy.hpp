#pragma once

#include "ecsim/purse.hpp"
#include "ecsim/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ecsim {

/// Value that has crossed the originator boundary, plus the counterfeit
/// injected out of thin air. These four counters close the books.
struct EconomyTotals {
    Money issued = 0;
    Money redeemed = 0;
    Money injected = 0;
    Money redeemed_taint = 0;
};

/// Outcome of one attempted transfer.
struct ExecResult {
    bool ok = false;
    DenyReason reason = DenyReason::purse_locked;
    std::uint32_t events = ev_none;
    Money taint_moved = 0;
    bool payee_locked_now = false;
};

/// All balances in the system. Entity ids: 0 is the originator; members come
/// first, then consumer purses, then merchant purses, in segment declaration
/// order. Every non-originator entity is stored as a Purse (members carry
/// EntityKind::member and no chip limits).
class Economy {
public:
    static Economy build(const Scenario& sc);

    Purse& entity(EntityId id);
    const Purse& entity(EntityId id) const;
    bool is_member(EntityId id) const;

    std::size_t entity_count() const { return purses_.size(); }
    std::size_t member_count() const { return member_count_; }
    /// All entities in id order: index i holds id i+1.
    std::vector<Purse>& entities() { return purses_; }
    const std::vector<Purse>& entities() const { return purses_; }

    const ClassMatrix& matrix() const { return matrix_; }
    EconomyTotals& totals() { return totals_; }
    const EconomyTotals& totals() const { return totals_; }

    /// True for purses removed from circulation (value already returned).
    bool dead(EntityId id) const { return dead_[std::size_t(id - 1)]; }
    void mark_dead(EntityId id) { dead_[std::size_t(id - 1)] = true; }

    /// Register a purse born mid-run; assigns and returns the next id.
    EntityId add_purse(Purse p);

    /// Issue exactly `amount` from the originator to a member.
    void issue(EntityId member, Money amount);

    /// Attempt a transfer between two entities; applies it when authorized.
    /// Redemption must name the originator as payee via redeem().
    ExecResult execute(EntityId payer, EntityId payee, TxType type, Money amount);

    /// Return `amount` from a member to the originator, retiring the
    /// proportional share of counterfeit value with it.
    Money redeem(EntityId member, Money amount); // returns taint retired

    Money total_balance() const;
    Money total_taint() const;

    /// Empty string when the books close; otherwise a human-readable
    /// description of the first broken invariant.
    std::string conservation_error() const;

private:
    std::vector<Purse> purses_;
    std::vector<char> dead_;
    std::size_t member_count_ = 0;
    ClassMatrix matrix_;
    EconomyTotals totals_;
};

} // namespace ecsim
