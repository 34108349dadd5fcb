#include "ecsim/detect.hpp"

#include <cmath>
#include <stdexcept>

namespace ecsim {

std::optional<DayEval> evaluate_day(const std::vector<double>& y, int d,
                                    const DetectorCfg& cfg, int first_active,
                                    int start_dow) {
    const int w = window_days(cfg.window);
    if (d < 0 || std::size_t(d) >= y.size())
        return std::nullopt;
    if (first_active < 0 || d < first_active + w)
        return std::nullopt; // still warming up (or never active)

    const int lo = d - w; // window is [lo, d)
    // Seasonal adjustment needs at least two observations of every weekday
    // inside the window; otherwise it is skipped.
    bool seasonal = cfg.seasonal;
    double idx[7] = {1, 1, 1, 1, 1, 1, 1};
    if (seasonal) {
        int cnt[7] = {0};
        for (int i = lo; i < d; ++i)
            cnt[(start_dow + i) % 7]++;
        for (int c : cnt)
            if (c < 2)
                seasonal = false;
    }
    if (seasonal) {
        double sum[7] = {0};
        int cnt[7] = {0};
        double total = 0.0;
        for (int i = lo; i < d; ++i) {
            const int dw = (start_dow + i) % 7;
            sum[dw] += y[std::size_t(i)];
            cnt[dw]++;
            total += y[std::size_t(i)];
        }
        const double grand = total / w;
        for (int dw = 0; dw < 7; ++dw) {
            const double m = sum[dw] / cnt[dw];
            idx[dw] = (grand > 0.0 && m > 0.0) ? m / grand : 1.0;
        }
    }

    auto value = [&](int i) {
        double v = y[std::size_t(i)] / idx[(start_dow + i) % 7];
        if (cfg.domain == DetectDomain::log)
            v = std::log1p(std::max(v, 0.0));
        return v;
    };

    double mean = 0.0;
    for (int i = lo; i < d; ++i)
        mean += value(i);
    mean /= w;
    double var = 0.0;
    for (int i = lo; i < d; ++i) {
        const double dv = value(i) - mean;
        var += dv * dv;
    }
    var /= w; // population variance of the window
    const double floor = cfg.domain == DetectDomain::log ? 1e-6 : 1.0;
    const double eps = std::max(0.01 * std::fabs(mean), floor);
    const double sd = std::sqrt(var);

    DayEval ev;
    ev.mean = mean;
    ev.stddev = sd;
    ev.z = (value(d) - mean) / std::max(sd, eps);
    ev.flagged = ev.z > cfg.k;
    return ev;
}

std::vector<int> SeriesResult::flagged_days() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < flagged.size(); ++i)
        if (flagged[i])
            out.push_back(int(i));
    return out;
}

SeriesResult detect_series(const std::vector<double>& y, const DetectorCfg& cfg,
                           int first_active, int start_dow) {
    SeriesResult r;
    r.evaluated.assign(y.size(), 0);
    r.flagged.assign(y.size(), 0);
    r.z.assign(y.size(), 0.0);
    for (int d = 0; std::size_t(d) < y.size(); ++d) {
        if (auto ev = evaluate_day(y, d, cfg, first_active, start_dow)) {
            r.evaluated[std::size_t(d)] = 1;
            r.flagged[std::size_t(d)] = ev->flagged;
            r.z[std::size_t(d)] = ev->z;
        }
    }
    return r;
}

bool MerchantSystemState::feed_day(int flags, int evals, double* threshold_out) {
    bool alarm = false;
    double thr = -1.0;
    if (evals > 0) {
        double p = cfg_.p_hat_floor;
        if (evals_so_far_ > 0)
            p = std::max(double(flags_so_far_) / double(evals_so_far_), cfg_.p_hat_floor);
        thr = double(evals) * p + cfg_.system_k * std::sqrt(double(evals) * p * (1.0 - p));
        alarm = double(flags) > thr;
    }
    flags_so_far_ += flags;
    evals_so_far_ += evals;
    if (threshold_out)
        *threshold_out = thr;
    return alarm;
}

MerchantSystemResult detect_merchants(const std::vector<std::vector<double>>& series,
                                      const MerchantMonitorCfg& cfg,
                                      const std::vector<int>& first_active,
                                      int start_dow) {
    if (series.size() != first_active.size())
        throw std::invalid_argument("detect_merchants: series/first_active size mismatch");
    MerchantSystemResult r;
    std::size_t days = 0;
    for (const auto& s : series)
        days = std::max(days, s.size());
    r.per_merchant.reserve(series.size());
    for (std::size_t m = 0; m < series.size(); ++m)
        r.per_merchant.push_back(
            detect_series(series[m], cfg.base, first_active[m], start_dow));

    r.alarm.assign(days, 0);
    r.flags_per_day.assign(days, 0);
    r.evaluated_per_day.assign(days, 0);
    r.threshold.assign(days, -1.0);
    MerchantSystemState state(cfg);
    for (std::size_t d = 0; d < days; ++d) {
        int flags = 0, evals = 0;
        for (const auto& pm : r.per_merchant) {
            if (d < pm.evaluated.size() && pm.evaluated[d]) {
                ++evals;
                if (pm.flagged[d])
                    ++flags;
            }
        }
        r.flags_per_day[d] = flags;
        r.evaluated_per_day[d] = evals;
        r.alarm[d] = state.feed_day(flags, evals, &r.threshold[d]);
    }
    return r;
}

std::vector<int> MerchantSystemResult::alarm_days() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < alarm.size(); ++i)
        if (alarm[i])
            out.push_back(int(i));
    return out;
}

} // namespace ecsim
