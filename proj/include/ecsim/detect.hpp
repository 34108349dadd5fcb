#pragma once

#include "ecsim/scenario.hpp"

#include <optional>
#include <vector>

namespace ecsim {

/// Verdict for one series on one day.
struct DayEval {
    bool flagged = false;
    double z = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
};

/// Evaluate day `d` of a daily series against its trailing window
/// (the `window` days ending at d-1).
///
///  * Days before `first_active` are not observations at all; evaluation
///    starts once a full window of real observations exists, so the first
///    evaluated day is first_active + window (the warm-up).
///  * When `seasonal` is set and every weekday appears at least twice in the
///    window, values are divided by their weekday index (weekday mean over
///    window mean) before scoring; otherwise the adjustment is skipped.
///  * `domain == log` scores log1p of the (adjusted) values.
///  * z = (y_d - mean) / max(stddev, eps) with eps = max(0.01*|mean|, floor),
///    floor = 1.0 in the linear domain and 1e-6 in the log domain; the day is
///    flagged when z > k.
///
/// `start_dow` is the weekday (0 = Monday) of series index 0. Returns nullopt
/// for days that cannot be evaluated.
std::optional<DayEval> evaluate_day(const std::vector<double>& y, int d,
                                    const DetectorCfg& cfg, int first_active,
                                    int start_dow);

struct SeriesResult {
    std::vector<char> evaluated; // size = series length
    std::vector<char> flagged;
    std::vector<double> z; // 0 where not evaluated
    std::vector<int> flagged_days() const;
};

/// Run evaluate_day over a whole series.
SeriesResult detect_series(const std::vector<double>& y, const DetectorCfg& cfg,
                           int first_active, int start_dow);

/// Population-level monitor over many merchant series. A day raises a system
/// alarm when the number of flagged merchants exceeds the binomial bound
/// n*p + system_k*sqrt(n*p*(1-p)), where p is the running empirical flag
/// rate over all evaluations strictly before that day, floored at
/// p_hat_floor.
struct MerchantSystemResult {
    std::vector<SeriesResult> per_merchant;
    std::vector<char> alarm;          // by day
    std::vector<int> flags_per_day;   // flagged merchant count
    std::vector<int> evaluated_per_day;
    std::vector<double> threshold;    // bound; -1 where no merchant evaluated
    std::vector<int> alarm_days() const;
};

MerchantSystemResult detect_merchants(const std::vector<std::vector<double>>& series,
                                      const MerchantMonitorCfg& cfg,
                                      const std::vector<int>& first_active,
                                      int start_dow);

/// Incremental form of the population monitor for in-run evaluation; feeding
/// days 0..n-1 in order reproduces detect_merchants exactly.
class MerchantSystemState {
public:
    explicit MerchantSystemState(const MerchantMonitorCfg& cfg) : cfg_(cfg) {}
    /// flags/evals: today's outcome across merchants. Returns alarm verdict.
    bool feed_day(int flags, int evals, double* threshold_out = nullptr);

private:
    MerchantMonitorCfg cfg_;
    long long flags_so_far_ = 0;
    long long evals_so_far_ = 0;
};

} // namespace ecsim
