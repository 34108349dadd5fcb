#include "ecsim/purse.hpp"

#include <doctest.h>

using namespace ecsim;

namespace {

ClassMatrix standard_matrix() {
    ClassMatrix m;
    m.allow(0, 1, TxType::withdrawal);
    m.allow(1, 0, TxType::deposit);
    m.allow(2, 0, TxType::deposit);
    m.allow(1, 2, TxType::purchase);
    m.allow(2, 1, TxType::refund);
    m.allow(1, 1, TxType::consumer_to_consumer);
    return m;
}

Purse consumer(EntityId id, Money balance) {
    Purse p;
    p.id = id;
    p.kind = EntityKind::consumer;
    p.class_id = 1;
    p.balance = balance;
    return p;
}

Purse merchant(EntityId id, Money balance) {
    Purse p;
    p.id = id;
    p.kind = EntityKind::merchant;
    p.class_id = 2;
    p.balance = balance;
    return p;
}

} // namespace

TEST_CASE("class matrix admits exactly the listed triples") {
    const ClassMatrix m = standard_matrix();
    CHECK(m.allows(1, 2, TxType::purchase));
    CHECK(m.allows(1, 1, TxType::consumer_to_consumer));
    CHECK_FALSE(m.allows(2, 1, TxType::purchase));       // reversed roles
    CHECK_FALSE(m.allows(1, 2, TxType::refund));         // wrong type
    CHECK_FALSE(m.allows(0, 2, TxType::withdrawal));     // unlisted classes
    CHECK(m.size() == 6);
}

TEST_CASE("authorization refuses in a fixed priority order") {
    const ClassMatrix m = standard_matrix();
    Purse payer = consumer(1, 1000);
    Purse payee = merchant(2, 0);

    SUBCASE("payer lock outranks everything else") {
        payer.locked = true;
        payee.locked = true;
        CHECK(authorize(payer, payee, TxType::refund, 5000, m) ==
              DenyReason::purse_locked);
    }
    SUBCASE("payee lock outranks the class check") {
        payee.locked = true;
        CHECK(authorize(payer, payee, TxType::refund, 5000, m) ==
              DenyReason::payee_locked);
    }
    SUBCASE("class check outranks funds") {
        CHECK(authorize(payer, payee, TxType::refund, 5000, m) ==
              DenyReason::class_not_allowed);
    }
    SUBCASE("insufficient funds outranks the purse limit") {
        payee.purse_limit = 100;
        CHECK(authorize(payer, payee, TxType::purchase, 5000, m) ==
              DenyReason::insufficient_funds);
    }
    SUBCASE("purse limit refuses an overflowing receive") {
        payee.purse_limit = 100;
        CHECK(authorize(payer, payee, TxType::purchase, 500, m) ==
              DenyReason::purse_limit);
    }
    SUBCASE("a clean transfer passes") {
        CHECK_FALSE(authorize(payer, payee, TxType::purchase, 500, m).has_value());
    }
}

TEST_CASE("a compromised chip ignores its own state, not its counterparty's") {
    const ClassMatrix m = standard_matrix();

    Purse rogue = consumer(1, 1000);
    rogue.compromised = true;
    rogue.locked = true; // a compromised chip does not honour its own lock
    Purse shop = merchant(2, 0);
    CHECK_FALSE(authorize(rogue, shop, TxType::purchase, 500, m).has_value());

    // The honest side still enforces the matrix.
    CHECK(authorize(rogue, shop, TxType::refund, 10, m) ==
          DenyReason::class_not_allowed);

    // An honest locked payee refuses even a compromised payer.
    shop.locked = true;
    CHECK(authorize(rogue, shop, TxType::purchase, 500, m) ==
          DenyReason::payee_locked);

    // Counterfeit injection needs a compromised payee.
    Purse honest = consumer(3, 0);
    CHECK(authorize(rogue, honest, TxType::counterfeit_injection, 100, m) ==
          DenyReason::class_not_allowed);
    Purse mule = consumer(4, 0);
    mule.compromised = true;
    CHECK_FALSE(
        authorize(rogue, mule, TxType::counterfeit_injection, 100, m).has_value());

    // A compromised payee also ignores its own purse limit.
    mule.purse_limit = 50;
    CHECK_FALSE(
        authorize(rogue, mule, TxType::counterfeit_injection, 100, m).has_value());
}

TEST_CASE("counterfeit value travels pro rata with each payment") {
    Purse payer = consumer(1, 1000);
    payer.taint = 300;
    Purse payee = consumer(2, 50);

    const ApplyResult r =
        apply_transfer(payer, payee, TxType::consumer_to_consumer, 500);
    CHECK(r.taint_moved == 150); // floor(500 * 300 / 1000)
    CHECK(payer.balance == 500);
    CHECK(payer.taint == 150);
    CHECK(payee.balance == 550);
    CHECK(payee.taint == 150);

    // The flooring remainder stays with the payer: nothing created or lost.
    Purse a = consumer(3, 3);
    a.taint = 2;
    Purse b = consumer(4, 0);
    apply_transfer(a, b, TxType::consumer_to_consumer, 1);
    CHECK(a.taint + b.taint == 2);
    CHECK(a.balance + b.balance == 3);
}

TEST_CASE("injection mints tainted value on the receiving chip") {
    Purse rogue = consumer(1, 0);
    rogue.compromised = true;
    Purse mule = consumer(2, 7);
    mule.compromised = true;

    const ApplyResult r =
        apply_transfer(rogue, mule, TxType::counterfeit_injection, 100);
    CHECK(r.taint_moved == 100);
    CHECK(mule.balance == 107);
    CHECK(mule.taint == 100);
    CHECK(rogue.balance == 0); // nothing leaves the payer: value is created
}

TEST_CASE("turnover limit locks autonomously on the crossing transfer") {
    Purse payer = consumer(1, 100000);
    Purse payee = consumer(2, 0);
    payee.ctl_limit = 1000;

    ApplyResult r1 = apply_transfer(payer, payee, TxType::consumer_to_consumer, 600);
    CHECK(r1.events == ev_none);
    CHECK_FALSE(r1.payee_locked_now);
    CHECK(payee.ctl_accum == 600);
    CHECK_FALSE(payee.locked);

    ApplyResult r2 = apply_transfer(payer, payee, TxType::consumer_to_consumer, 600);
    CHECK((r2.events & ev_ctl_exceeded) != 0);
    CHECK((r2.events & ev_purse_locked) != 0);
    CHECK(r2.payee_locked_now);
    CHECK(payee.locked);
    CHECK(payee.balance == 1200); // the crossing transfer itself completed
    CHECK(payee.ctl_accum == 1200);

    // Only peer receipts count: member loads leave the counter alone.
    Purse fresh = consumer(3, 0);
    fresh.ctl_limit = 1000;
    Purse bank(consumer(4, 1000000));
    bank.kind = EntityKind::member;
    bank.class_id = 0;
    apply_transfer(bank, fresh, TxType::withdrawal, 5000);
    CHECK(fresh.ctl_accum == 0);
    CHECK_FALSE(fresh.locked);
}

TEST_CASE("receipt types counting toward the turnover limit") {
    CHECK(counts_toward_ctl(TxType::purchase));
    CHECK(counts_toward_ctl(TxType::refund));
    CHECK(counts_toward_ctl(TxType::consumer_to_consumer));
    CHECK_FALSE(counts_toward_ctl(TxType::withdrawal));
    CHECK_FALSE(counts_toward_ctl(TxType::deposit));
    CHECK_FALSE(counts_toward_ctl(TxType::issuance));
    CHECK_FALSE(counts_toward_ctl(TxType::redemption));
    CHECK_FALSE(counts_toward_ctl(TxType::counterfeit_injection));
    CHECK_FALSE(counts_toward_ctl(TxType::recustomization));
    CHECK_FALSE(counts_toward_ctl(TxType::c3_delivery));
}

TEST_CASE("a compromised chip never accumulates turnover") {
    Purse payer = consumer(1, 100000);
    Purse mule = consumer(2, 0);
    mule.ctl_limit = 100;
    mule.compromised = true;
    apply_transfer(payer, mule, TxType::consumer_to_consumer, 5000);
    CHECK(mule.ctl_accum == 0);
    CHECK_FALSE(mule.locked);
}

TEST_CASE("re-customization resets counters, lock and command history") {
    Purse p = consumer(1, 777);
    p.ctl_accum = 1500;
    p.locked = true;
    p.carried_commands = 0b1010;
    p.applied_commands = 0b0010;

    const Money pre = recustomize(p);
    CHECK(pre == 1500);
    CHECK(p.ctl_accum == 0);
    CHECK_FALSE(p.locked);
    CHECK(p.carried_commands == 0);
    CHECK(p.applied_commands == 0);
    CHECK(p.recustomization_count == 1);
    CHECK(p.balance == 777); // value is untouched

    recustomize(p);
    CHECK(p.recustomization_count == 2);
}

TEST_CASE("remote commands target and apply per their kind") {
    Purse p = consumer(5, 100);
    p.segment_index = 3;

    C3Command lock_all{0, C3Action::lock, C3TargetKind::all_purses, 0, 0};
    C3Command lock_class{1, C3Action::lock, C3TargetKind::by_class, 1, 0};
    C3Command lock_seg{2, C3Action::lock, C3TargetKind::by_segment, 3, 0};
    C3Command lock_id{3, C3Action::lock, C3TargetKind::by_purse_id, 5, 0};
    C3Command lock_other{4, C3Action::lock, C3TargetKind::by_purse_id, 6, 0};

    CHECK(c3_targets(lock_all, p));
    CHECK(c3_targets(lock_class, p));
    CHECK(c3_targets(lock_seg, p));
    CHECK(c3_targets(lock_id, p));
    CHECK_FALSE(c3_targets(lock_other, p));

    SUBCASE("lock and unlock") {
        std::uint32_t ev = apply_c3(p, lock_all);
        CHECK((ev & ev_c3_applied) != 0);
        CHECK((ev & ev_purse_locked) != 0);
        CHECK(p.locked);
        C3Command unlock{5, C3Action::unlock, C3TargetKind::all_purses, 0, 0};
        ev = apply_c3(p, unlock);
        CHECK((ev & ev_c3_applied) != 0);
        CHECK_FALSE(p.locked);
    }
    SUBCASE("limit updates") {
        C3Command set_ctl{6, C3Action::set_ctl_limit, C3TargetKind::all_purses, 0,
                          4242};
        apply_c3(p, set_ctl);
        CHECK(p.ctl_limit == 4242);
        C3Command set_purse{7, C3Action::set_purse_limit, C3TargetKind::all_purses,
                            0, 9999};
        apply_c3(p, set_purse);
        CHECK(p.purse_limit == 9999);
    }
    SUBCASE("counter reset") {
        p.ctl_accum = 321;
        C3Command reset{8, C3Action::reset_counters, C3TargetKind::all_purses, 0, 0};
        apply_c3(p, reset);
        CHECK(p.ctl_accum == 0);
    }
}
