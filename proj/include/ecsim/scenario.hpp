#pragma once

#include "ecsim/clock.hpp"
#include "ecsim/money.hpp"
#include "ecsim/purse.hpp"

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ecsim {

/// Truncated-normal money draw, bounds inclusive, in minor units.
/// stddev == 0 degenerates to the (clamped) mean.
struct AmountDist {
    double mean = 0.0;
    double stddev = 0.0;
    Money min = 1;
    Money max = 1000000000000LL;
};

/// A Poisson-count activity: how many events per day, and how large each is.
struct PoissonActivity {
    double lambda = 0.0;
    AmountDist amount;
};

struct MemberSegmentCfg {
    std::string name;
    int count = 1;
    int class_id = 0;
    /// A counterfeit member is the acquiring bank of the rogue operation;
    /// purely a label for reporting, its accounts behave normally.
    bool counterfeit = false;
};

struct ConsumerSegmentCfg {
    std::string name;
    int count = 0;
    int class_id = 0;
    int member_segment = 0; // global segment index of the home member segment
    AmountDist initial_balance;
    Money purse_limit = 0;
    Money ctl_limit = 0;
    PoissonActivity purchase;
    PoissonActivity withdrawal;
    PoissonActivity peer_transfer;
    PoissonActivity deposit;
    int circle_size = 4;      // merchants this purse habitually visits
    double in_circle_p = 0.9; // chance a purchase goes to the circle
    /// Global segment index the circle is drawn from; -1 = all merchants.
    int circle_merchant_segment = -1;
    bool compromised = false;
    double monthly_birth_rate = 0.0;
    double monthly_death_rate = 0.0;
};

struct MerchantSegmentCfg {
    std::string name;
    int count = 0;
    int class_id = 0;
    int member_segment = 0;
    Money purse_limit = 0;
    Money ctl_limit = 0;
    /// Balance kept on the purse after the end-of-day sweep to the member.
    Money deposit_float = 0;
    double refund_p = 0.0;        // chance a purchase is partially refunded
    double refund_fraction = 0.0; // refunded share of the purchase amount
};

/// Counterfeit distribution run: a test day, full-volume days, and one
/// stand-down day in between.
struct AttackCfg {
    bool enabled = false;
    Date start_date{};
    int n_days = 0;
    int stand_down_day = 3; // 1-based position of the zero-volume day
    Money test_amount = 0;
    Money full_amount = 0;
    int counterfeiter_segment = 0; // global segment index
    int buyer_segment = 0;         // global segment index
    AmountDist batch;              // value sold per buyer per sale
    int sale_hour_lo = 9;
    int sale_hour_hi = 20;
    /// Buyers launder what they bought: extra purchases per day from the
    /// first sale until spend_days_after past the end of the run.
    double spend_lambda = 0.0;
    AmountDist spend_amount;
    int spend_days_after = 0;
};

/// Per-day planned injection volumes derived from an AttackCfg.
std::vector<Money> attack_daily_plan(const AttackCfg& a);

struct C3ScriptEntry {
    C3Command cmd;
    std::optional<Date> at_date;
    std::string on_alarm;     // "", "currency" or "merchant"
    int delay_days = 0;       // staging delay after the alarm day
    std::vector<int> member_segments; // staging members; empty = all
};

enum class DetectWindow : std::uint8_t { daily = 1, weekly = 7, monthly = 30 };
enum class DetectDomain : std::uint8_t { linear, log };

int window_days(DetectWindow w);
const char* to_string(DetectWindow w);
DetectWindow window_from_string(const std::string& s);
const char* to_string(DetectDomain d);
DetectDomain domain_from_string(const std::string& s);

struct DetectorCfg {
    DetectWindow window = DetectWindow::monthly;
    double k = 4.0;
    bool seasonal = false;
    DetectDomain domain = DetectDomain::linear;
};

struct MerchantMonitorCfg {
    DetectorCfg base;
    double system_k = 4.0;
    /// Lower bound on the estimated per-merchant flag rate used by the
    /// population-level alarm; keeps the binomial bound meaningful when no
    /// flags have been seen yet.
    double p_hat_floor = 0.005;
};

struct DetectionCfg {
    bool enabled = true;
    DetectorCfg currency;
    MerchantMonitorCfg merchants;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 1;

    Date start_date{};
    int days = 0;
    std::set<Date> holidays;
    std::array<double, 7> dow_factors{1, 1, 1, 1, 1, 1, 1}; // Monday..Sunday
    double holiday_factor = 1.0;

    /// Daily chance an idle purse syncs with its home member (command
    /// distribution channel besides ordinary member contact).
    double member_contact_rate = 0.25;
    /// Daily chance the holder of a locked, uncompromised purse takes it to
    /// the bank to have it re-customized.
    double recustomize_on_lock_p = 0.0;

    std::vector<std::string> classes; // class id = index
    std::vector<std::tuple<int, int, TxType>> matrix_entries;

    std::vector<MemberSegmentCfg> members;
    std::vector<ConsumerSegmentCfg> consumers;
    std::vector<MerchantSegmentCfg> merchants;

    AttackCfg attack;
    std::vector<C3ScriptEntry> c3_script;
    DetectionCfg detection;

    /// Canonical content digest (sorted-key JSON, SHA-256 hex); set by the
    /// loader, empty for hand-built scenarios.
    std::string digest;

    // --- derived helpers -------------------------------------------------

    /// Global segment numbering: members, then consumers, then merchants,
    /// in declaration order.
    int segment_count() const;
    std::string segment_name(int global_index) const;
    /// Returns -1 when the name is unknown.
    int segment_index(const std::string& name) const;

    ClassMatrix build_matrix() const;
    int class_index(const std::string& name) const; // -1 when unknown
};

} // namespace ecsim
