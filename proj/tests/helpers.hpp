#pragma once

#include "ecsim/scenario.hpp"

namespace ecsim::testutil {

/// A small but complete economy built in code: one member bank, one consumer
/// segment, one merchant segment, the standard class matrix. Tests mutate the
/// returned object for their specific setup.
inline Scenario small_scenario(std::uint64_t seed, int days, int consumers,
                               int merchants) {
    Scenario sc;
    sc.name = "unit-small";
    sc.seed = seed;
    sc.start_date = parse_date("1998-01-05");
    sc.days = days;
    sc.classes = {"bank", "consumer", "merchant"};
    sc.matrix_entries = {
        {0, 1, TxType::withdrawal},  {1, 0, TxType::deposit},
        {2, 0, TxType::deposit},     {1, 2, TxType::purchase},
        {2, 1, TxType::refund},      {1, 1, TxType::consumer_to_consumer},
    };

    MemberSegmentCfg bank;
    bank.name = "banks";
    bank.count = 1;
    bank.class_id = 0;
    sc.members = {bank};

    ConsumerSegmentCfg cons;
    cons.name = "people";
    cons.count = consumers;
    cons.class_id = 1;
    cons.member_segment = 0;
    cons.initial_balance = {5000, 1500, 0, 50000};
    cons.purse_limit = 50000;
    cons.ctl_limit = 20000;
    cons.purchase = {1.0, {800, 300, 50, 3000}};
    cons.withdrawal = {0.1, {5000, 2000, 500, 20000}};
    cons.peer_transfer = {0.05, {500, 200, 50, 2000}};
    cons.deposit = {0.02, {1000, 400, 50, 5000}};
    cons.circle_size = 2;
    cons.in_circle_p = 0.9;
    sc.consumers = {cons};

    MerchantSegmentCfg shop;
    shop.name = "shops";
    shop.count = merchants;
    shop.class_id = 2;
    shop.member_segment = 0;
    shop.ctl_limit = 100000000;
    shop.refund_p = 0.02;
    shop.refund_fraction = 0.5;
    sc.merchants = {shop};

    sc.detection.enabled = false;
    return sc;
}

/// Adds a compromised counterfeiter segment, a buyer segment and an attack
/// schedule to a small scenario. Buyer lock limit is sized so the second
/// batch locks the purse.
inline void add_attack(Scenario& sc, const std::string& start_date, int n_days) {
    ConsumerSegmentCfg buyers = sc.consumers[0];
    buyers.name = "buyers";
    buyers.count = 10;
    buyers.ctl_limit = 20000;
    buyers.monthly_birth_rate = 0.0;
    buyers.monthly_death_rate = 0.0;
    sc.consumers.push_back(buyers);

    ConsumerSegmentCfg rogue;
    rogue.name = "counterfeiters";
    rogue.count = 2;
    rogue.class_id = 1;
    rogue.member_segment = 0;
    rogue.compromised = true;
    rogue.circle_size = 0;
    sc.consumers.push_back(rogue);

    sc.attack.enabled = true;
    sc.attack.start_date = parse_date(start_date);
    sc.attack.n_days = n_days;
    sc.attack.stand_down_day = 3;
    sc.attack.test_amount = 10000;
    sc.attack.full_amount = 300000;
    sc.attack.counterfeiter_segment = sc.segment_index("counterfeiters");
    sc.attack.buyer_segment = sc.segment_index("buyers");
    sc.attack.batch = {12000, 3000, 6000, 20000};
    sc.attack.spend_lambda = 2.0;
    sc.attack.spend_amount = {3000, 1000, 500, 8000};
    sc.attack.spend_days_after = 4;
}

} // namespace ecsim::testutil
