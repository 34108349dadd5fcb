#include "ecsim/detect.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace ecsim;

namespace {

DetectorCfg cfg(DetectWindow w, double k, bool seasonal = false,
                DetectDomain dom = DetectDomain::linear) {
    DetectorCfg c;
    c.window = w;
    c.k = k;
    c.seasonal = seasonal;
    c.domain = dom;
    return c;
}

} // namespace

TEST_CASE("warm-up: evaluation starts one window after the first observation") {
    const std::vector<double> y(40, 100.0);
    const DetectorCfg c = cfg(DetectWindow::weekly, 3.0);

    CHECK_FALSE(evaluate_day(y, 6, c, 0, 0).has_value());
    CHECK(evaluate_day(y, 7, c, 0, 0).has_value());

    // A series that becomes active later warms up later.
    CHECK_FALSE(evaluate_day(y, 7, c, 3, 0).has_value());
    CHECK_FALSE(evaluate_day(y, 9, c, 3, 0).has_value());
    CHECK(evaluate_day(y, 10, c, 3, 0).has_value());

    // Inactive series never evaluate.
    CHECK_FALSE(evaluate_day(y, 20, c, -1, 0).has_value());
    CHECK_FALSE(evaluate_day(y, 400, c, 0, 0).has_value()); // out of range
}

TEST_CASE("a constant series never flags in any model") {
    const std::vector<double> y(90, 500.0);
    for (DetectWindow w :
         {DetectWindow::daily, DetectWindow::weekly, DetectWindow::monthly})
        for (DetectDomain dom : {DetectDomain::linear, DetectDomain::log})
            for (bool seas : {false, true}) {
                const SeriesResult r = detect_series(y, cfg(w, 3.0, seas, dom), 0, 0);
                CHECK(r.flagged_days().empty());
            }
}

TEST_CASE("a spike clearing k sigma over the floored deviation flags") {
    // Constant 100 with sd 0: the epsilon floor takes over. In the linear
    // domain eps = max(0.01*100, 1.0) = 1, so a +50 spike scores z = 50.
    std::vector<double> y(40, 100.0);
    y[35] = 150.0;
    const SeriesResult r = detect_series(y, cfg(DetectWindow::monthly, 4.0), 0, 0);
    CHECK(r.flagged_days() == std::vector<int>{35});
    CHECK(r.z[35] == doctest::Approx(50.0));

    // The day after, the spike sits inside the window and inflates the
    // deviation instead.
    CHECK(r.z[36] < 0.5);
}

TEST_CASE("z-scores match a hand calculation") {
    // Window of seven known values, then a probe day.
    std::vector<double> y = {10, 12, 8, 11, 9, 13, 7, 16};
    const SeriesResult r = detect_series(y, cfg(DetectWindow::weekly, 2.0), 0, 0);
    // mean = 10, population variance = 4, sd = 2; eps = max(0.1, 1) = 1.
    CHECK(r.evaluated[7] != 0);
    CHECK(r.z[7] == doctest::Approx((16.0 - 10.0) / 2.0));
    CHECK(r.flagged[7] != 0);
}

TEST_CASE("log domain scores log1p of the values") {
    std::vector<double> y(40, 1000.0);
    y[35] = 4000.0;
    const SeriesResult r =
        detect_series(y, cfg(DetectWindow::monthly, 3.0, false, DetectDomain::log),
                      0, 0);
    // sd = 0; eps = max(0.01*log1p(1000), 1e-6) ~ 0.0691; z ~ 20.
    const double expect =
        (std::log1p(4000.0) - std::log1p(1000.0)) / (0.01 * std::log1p(1000.0));
    CHECK(r.z[35] == doctest::Approx(expect).epsilon(1e-9));
    CHECK(r.flagged_days() == std::vector<int>{35});
}

TEST_CASE("weekday adjustment divides out a perfectly periodic pattern") {
    // Strong weekday shape, monthly window: every weekday appears >=4 times
    // in 30 days, so the seasonal index applies and the residual is constant.
    const double shape[7] = {1.0, 0.5, 0.8, 1.2, 1.5, 2.0, 0.3};
    std::vector<double> y;
    for (int d = 0; d < 90; ++d)
        y.push_back(1000.0 * shape[d % 7]);

    const SeriesResult seasonal =
        detect_series(y, cfg(DetectWindow::monthly, 3.0, true), 0, 0);
    CHECK(seasonal.flagged_days().empty());
    for (int d = 30; d < 90; ++d)
        CHECK(std::fabs(seasonal.z[std::size_t(d)]) < 1e-9);

    // Without the adjustment the same pattern has real deviation: Saturdays
    // (factor 2.0) score well above the mean.
    const SeriesResult plain =
        detect_series(y, cfg(DetectWindow::monthly, 1.0, false), 0, 0);
    CHECK_FALSE(plain.flagged_days().empty());
}

TEST_CASE("a weekly window never qualifies for the weekday adjustment") {
    // Seven days cover each weekday once; the rule needs two sightings, so
    // seasonal weekly must behave exactly like plain weekly.
    const double shape[7] = {1.0, 0.5, 0.8, 1.2, 1.5, 2.0, 0.3};
    std::vector<double> y;
    for (int d = 0; d < 60; ++d)
        y.push_back(1000.0 * shape[d % 7] + d);

    const SeriesResult a = detect_series(y, cfg(DetectWindow::weekly, 3.0, true), 0, 0);
    const SeriesResult b = detect_series(y, cfg(DetectWindow::weekly, 3.0, false), 0, 0);
    CHECK(a.z == b.z);
    CHECK(a.flagged == b.flagged);
}

TEST_CASE("start-of-week offset shifts the weekday index correctly") {
    // The same periodic series, declared to start on a Thursday: adjustment
    // must still cancel it exactly.
    const double shape[7] = {1.0, 0.5, 0.8, 1.2, 1.5, 2.0, 0.3};
    std::vector<double> y;
    for (int d = 0; d < 90; ++d)
        y.push_back(1000.0 * shape[(d + 3) % 7]);
    const SeriesResult r = detect_series(y, cfg(DetectWindow::monthly, 3.0, true), 0, 3);
    CHECK(r.flagged_days().empty());
    for (int d = 30; d < 90; ++d)
        CHECK(std::fabs(r.z[std::size_t(d)]) < 1e-9);
}

TEST_CASE("population monitor: alarm exactly when flags beat the binomial bound") {
    MerchantMonitorCfg mc;
    mc.base = cfg(DetectWindow::weekly, 3.0, false, DetectDomain::log);
    mc.system_k = 3.0;
    mc.p_hat_floor = 0.01;

    // 40 merchants, 30 days of quiet baseline at distinct levels, then one
    // day where 12 of them spike tenfold.
    const int n = 40, days = 30, spike_day = 25;
    std::vector<std::vector<double>> series(n, std::vector<double>(days));
    for (int m = 0; m < n; ++m)
        for (int d = 0; d < days; ++d)
            series[std::size_t(m)][std::size_t(d)] = 1000.0 + 10.0 * m;
    for (int m = 0; m < 12; ++m)
        series[std::size_t(m)][spike_day] = 10.0 * (1000.0 + 10.0 * m);

    const std::vector<int> first_active(n, 0);
    const MerchantSystemResult r = detect_merchants(series, mc, first_active, 0);

    CHECK(r.flags_per_day[spike_day] == 12);
    CHECK(r.evaluated_per_day[spike_day] == n);
    // No flags before the spike: p-hat sits on the floor. Bound =
    // 40*0.01 + 3*sqrt(40*0.01*0.99) = 2.288; 12 > bound -> alarm.
    CHECK(r.threshold[spike_day] ==
          doctest::Approx(40 * 0.01 + 3 * std::sqrt(40 * 0.01 * 0.99)));
    CHECK(r.alarm_days() == std::vector<int>{spike_day});
}

TEST_CASE("incremental population monitor replays the batch result") {
    MerchantMonitorCfg mc;
    mc.base = cfg(DetectWindow::weekly, 2.5, false, DetectDomain::log);
    mc.system_k = 2.0;
    mc.p_hat_floor = 0.02;

    // Deterministic pseudo-noise, no RNG needed.
    const int n = 17, days = 50;
    std::vector<std::vector<double>> series(n, std::vector<double>(days));
    std::uint64_t x = 88172645463325252ULL;
    auto noise = [&] {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        return double(x % 1000) / 999.0;
    };
    for (auto& s : series)
        for (auto& v : s)
            v = 500.0 + 400.0 * noise();

    const std::vector<int> first_active(n, 0);
    const MerchantSystemResult batch = detect_merchants(series, mc, first_active, 0);

    MerchantSystemState inc(mc);
    for (int d = 0; d < days; ++d) {
        double thr = -1.0;
        const bool alarm = inc.feed_day(batch.flags_per_day[std::size_t(d)],
                                        batch.evaluated_per_day[std::size_t(d)], &thr);
        CHECK(alarm == (batch.alarm[std::size_t(d)] != 0));
        if (batch.evaluated_per_day[std::size_t(d)] > 0)
            CHECK(thr == doctest::Approx(batch.threshold[std::size_t(d)]).epsilon(1e-12));
    }
}

TEST_CASE("merchants without history are scored only after their own warm-up") {
    MerchantMonitorCfg mc;
    mc.base = cfg(DetectWindow::weekly, 3.0);
    const int days = 20;
    std::vector<std::vector<double>> series(2, std::vector<double>(days, 100.0));
    const std::vector<int> first_active = {0, 10};

    const MerchantSystemResult r = detect_merchants(series, mc, first_active, 0);
    CHECK(r.per_merchant[0].evaluated[7] != 0);
    CHECK(r.per_merchant[1].evaluated[7] == 0);
    CHECK(r.per_merchant[1].evaluated[16] == 0);
    CHECK(r.per_merchant[1].evaluated[17] != 0);
    CHECK(r.evaluated_per_day[7] == 1);
    CHECK(r.evaluated_per_day[17] == 2);
}
