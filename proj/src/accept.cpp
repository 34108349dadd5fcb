#include "ecsim/accept.hpp"

#include "ecsim/engine.hpp"
#include "ecsim/ledger_io.hpp"
#include "ecsim/report.hpp"
#include "ecsim/rng.hpp"
#include "ecsim/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace ecsim {

Scenario replication_scenario() {
    LoadResult res = load_scenario_json(replication_scenario_json());
    if (!res.scenario)
        throw std::runtime_error("embedded scenario does not validate:\n" +
                                 format_errors(res.errors));
    return *res.scenario;
}

namespace {

// ---------------------------------------------------------------------------
// run plumbing

struct RunOutput {
    RunResult result;
    std::string ledger_path;
    std::string denials_path;
};

RunOutput run_to_dir(const Scenario& sc, const std::string& dir) {
    fs::create_directories(dir);
    TsvLedgerWriter w(dir, make_header(sc));
    RunOutput out;
    out.result = run_simulation(sc, w);
    w.close();
    out.ledger_path = w.ledger_path();
    out.denials_path = w.denials_path();
    return out;
}

RunResult run_quiet(const Scenario& sc) {
    NullSink sink;
    return run_simulation(sc, sink);
}

int attack_day_of(const Scenario& sc) {
    return int((sc.attack.start_date - sc.start_date).count());
}

// ---------------------------------------------------------------------------
// scenario variants, all derived from the canonical one

/// Same economy shape at roughly a fifth of the scale; short enough that a
/// multi-seed study stays cheap.
Scenario mid_scenario(std::uint64_t seed) {
    Scenario sc = replication_scenario();
    sc.name = "street-corner-mid";
    sc.digest.clear();
    sc.seed = seed;
    sc.start_date = parse_date("1998-01-05");
    sc.days = 80;
    sc.holidays.clear();
    sc.consumers[0].count = 800;
    sc.consumers[1].count = 120;
    sc.merchants[0].count = 40;
    sc.merchants[1].count = 10;
    sc.attack.start_date = parse_date("1998-03-16"); // day 70 of the run
    sc.attack.test_amount = 30000;
    sc.attack.full_amount = 3000000;
    return sc;
}

/// Honest traffic only, full merchant population 90 days; used to measure
/// false-alarm behaviour. Holidays are dropped so the quiet series is
/// genuinely stationary.
Scenario purity_scenario(std::uint64_t seed) {
    Scenario sc = replication_scenario();
    sc.name = "no-attack-purity";
    sc.digest.clear();
    sc.seed = seed;
    sc.start_date = parse_date("1998-01-05");
    sc.days = 90;
    sc.holidays.clear();
    sc.attack = AttackCfg{};
    return sc;
}

/// Flat calendar, heavy merchant traffic, no attack: the setting in which
/// deposit totals should look log-symmetric.
Scenario calibration_scenario(std::uint64_t seed) {
    Scenario sc = replication_scenario();
    sc.name = "generator-calibration";
    sc.digest.clear();
    sc.seed = seed;
    sc.start_date = parse_date("1998-01-05");
    sc.days = 150;
    sc.holidays.clear();
    sc.dow_factors = {1, 1, 1, 1, 1, 1, 1};
    sc.holiday_factor = 1.0;
    sc.consumers[0].count = 2000;
    sc.consumers[0].monthly_birth_rate = 0.0;
    sc.consumers[0].monthly_death_rate = 0.0;
    sc.consumers[1].count = 0;
    sc.merchants[0].count = 40;
    sc.merchants[1].count = 0;
    sc.attack = AttackCfg{};
    sc.detection.enabled = false;
    return sc;
}

/// 50-consumer, 30-day instance small enough to audit row by row.
Scenario tiny_scenario(std::uint64_t seed) {
    Scenario sc = replication_scenario();
    sc.name = "tiny-audit";
    sc.digest.clear();
    sc.seed = seed;
    sc.start_date = parse_date("1998-01-05");
    sc.days = 30;
    sc.holidays.clear();
    sc.recustomize_on_lock_p = 0.3;
    sc.consumers[0].count = 40;
    sc.consumers[0].monthly_birth_rate = 0.0;
    sc.consumers[0].monthly_death_rate = 0.0;
    sc.consumers[1].count = 10;
    sc.consumers[1].ctl_limit = 20000;
    sc.merchants[0].count = 6;
    sc.merchants[1].count = 2;
    sc.attack.start_date = parse_date("1998-01-25"); // day 20
    sc.attack.test_amount = 10000;
    sc.attack.full_amount = 300000;
    sc.attack.batch = AmountDist{12000, 3000, 6000, 20000};
    sc.attack.spend_lambda = 2.0;
    sc.attack.spend_amount = AmountDist{3000, 1000, 500, 8000};
    sc.attack.spend_days_after = 4;
    // A 30-day run can only warm up a weekly window.
    sc.detection.currency.window = DetectWindow::weekly;
    sc.detection.merchants.base.window = DetectWindow::weekly;
    return sc;
}

// ---------------------------------------------------------------------------
// shared state across checks

struct Ctx {
    std::string work;
    std::string scenario_dir;

    Scenario flagship;
    int attack_day = 0;
    RunOutput run_a;        // canonical run, seed as shipped
    LedgerData ledger_a;    // parsed back from disk
    DailySeries series_a;   // daily aggregates of run_a
    std::string sha_ledger_a;

    std::vector<std::uint64_t> mid_seeds;
    std::vector<RunResult> mid_runs; // one per mid seed, computed once
    RunResult& mid_run(std::size_t i) {
        if (mid_runs.empty()) {
            mid_runs.reserve(mid_seeds.size());
            for (std::uint64_t s : mid_seeds)
                mid_runs.push_back(run_quiet(mid_scenario(s)));
        }
        return mid_runs[i];
    }
};

CheckResult make(const std::string& name, bool pass, const std::string& detail) {
    return CheckResult{name, pass, detail};
}

template <typename F>
CheckResult guarded(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return make(name, false, std::string("exception: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// ledger-derived facts

std::set<EntityId> counterfeiter_ids(const LedgerData& ledger) {
    std::set<EntityId> out;
    for (const auto& r : ledger.records)
        if (r.type == TxType::counterfeit_injection)
            out.insert(r.payee_id);
    return out;
}

/// Buyers are whoever a counterfeiter sold value to.
std::set<EntityId> buyer_ids(const LedgerData& ledger,
                             const std::set<EntityId>& counterfeiters) {
    std::set<EntityId> out;
    for (const auto& r : ledger.records)
        if (r.type == TxType::consumer_to_consumer &&
            counterfeiters.count(r.payer_id))
            out.insert(r.payee_id);
    return out;
}

/// Purses that tripped their credit-turnover lock on or before `until`.
std::set<EntityId> ctl_locked_ids(const LedgerData& ledger, Date until) {
    std::set<EntityId> out;
    for (const auto& r : ledger.records)
        if ((r.events & ev_ctl_exceeded) && r.date <= until)
            out.insert(r.payee_id);
    return out;
}

// ---------------------------------------------------------------------------
// independent re-implementation of the rolling monitor, used as an oracle

struct NaiveEval {
    bool evaluated = false;
    bool flagged = false;
    double z = 0.0;
    double mean = 0.0;
    double sd = 0.0;
};

NaiveEval naive_eval(const std::vector<double>& y, int d, const DetectorCfg& cfg,
                     int first_active, int start_dow) {
    NaiveEval out;
    const int w = window_days(cfg.window);
    if (d < 0 || std::size_t(d) >= y.size() || first_active < 0 ||
        d < first_active + w)
        return out;
    out.evaluated = true;

    std::vector<double> win(y.begin() + (d - w), y.begin() + d);

    bool seasonal = cfg.seasonal;
    std::vector<double> index(7, 1.0);
    if (seasonal) {
        std::vector<std::vector<double>> by_dow(7);
        for (int i = 0; i < w; ++i)
            by_dow[std::size_t((start_dow + d - w + i) % 7)].push_back(
                win[std::size_t(i)]);
        for (const auto& g : by_dow)
            if (g.size() < 2)
                seasonal = false;
        if (seasonal) {
            long double total = 0.0L;
            for (double v : win)
                total += v;
            const double grand = double(total / w);
            for (int dw = 0; dw < 7; ++dw) {
                long double s = 0.0L;
                for (double v : by_dow[std::size_t(dw)])
                    s += v;
                const double m = double(s / by_dow[std::size_t(dw)].size());
                index[std::size_t(dw)] = (grand > 0.0 && m > 0.0) ? m / grand : 1.0;
            }
        }
    }

    auto transform = [&](double v, int day) {
        double x = v / index[std::size_t((start_dow + day) % 7)];
        if (cfg.domain == DetectDomain::log)
            x = std::log1p(std::max(x, 0.0));
        return x;
    };

    std::vector<double> xs;
    for (int i = 0; i < w; ++i)
        xs.push_back(transform(win[std::size_t(i)], d - w + i));
    double mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= double(w);
    double var = 0.0;
    for (double x : xs)
        var += (x - mean) * (x - mean);
    var /= double(w);
    const double sd = std::sqrt(var);
    const double floor = cfg.domain == DetectDomain::log ? 1e-6 : 1.0;
    const double eps = std::max(0.01 * std::fabs(mean), floor);
    out.mean = mean;
    out.sd = sd;
    out.z = (transform(y[std::size_t(d)], d) - mean) / std::max(sd, eps);
    out.flagged = out.z > cfg.k;
    return out;
}

bool close_rel(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Compares the production evaluation of a whole series against the oracle.
// Returns an empty string on agreement, a description of the first
// disagreement otherwise.
std::string compare_series(const std::vector<double>& y, const DetectorCfg& cfg,
                           int first_active, int start_dow) {
    const SeriesResult prod = detect_series(y, cfg, first_active, start_dow);
    for (int d = 0; std::size_t(d) < y.size(); ++d) {
        const NaiveEval ne = naive_eval(y, d, cfg, first_active, start_dow);
        const bool pe = prod.evaluated[std::size_t(d)] != 0;
        if (ne.evaluated != pe)
            return "day " + std::to_string(d) + ": evaluated " +
                   std::to_string(pe) + " vs oracle " + std::to_string(ne.evaluated);
        if (!ne.evaluated)
            continue;
        if ((prod.flagged[std::size_t(d)] != 0) != ne.flagged)
            return "day " + std::to_string(d) + ": flag disagreement";
        if (!close_rel(prod.z[std::size_t(d)], ne.z, 1e-9))
            return "day " + std::to_string(d) + ": z " +
                   std::to_string(prod.z[std::size_t(d)]) + " vs oracle " +
                   std::to_string(ne.z);
    }
    return "";
}

// ---------------------------------------------------------------------------
// moments

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double skew = 0.0;
    std::size_t n = 0;
};

Moments moments_of(const std::vector<double>& xs) {
    Moments m;
    m.n = xs.size();
    if (m.n == 0)
        return m;
    long double s = 0.0L;
    for (double x : xs)
        s += x;
    m.mean = double(s / double(m.n));
    long double v2 = 0.0L, v3 = 0.0L;
    for (double x : xs) {
        const long double d = x - m.mean;
        v2 += d * d;
        v3 += d * d * d;
    }
    m.var = double(v2 / double(m.n));
    const double sd = std::sqrt(m.var);
    m.skew = sd > 0.0 ? double(v3 / double(m.n)) / (sd * sd * sd) : 0.0;
    return m;
}

// ---------------------------------------------------------------------------
// the checks

CheckResult check_conservation(Ctx& ctx) {
    return guarded("conservation", [&] {
        std::ostringstream os;
        // Every simulation in this suite runs the nightly exact audit and
        // throws on the first violation; this check replays the canonical
        // ledger from disk as an independent pass, then runs the shipped
        // scenario corpus.
        const ReplayResult audit = replay_ledger(ctx.ledger_a);
        bool pass = audit.ok;
        os << "ledger replay " << (audit.ok ? "ok" : ("FAILED: " + audit.error))
           << "; issued=" << audit.issued << " injected=" << audit.injected
           << " redeemed=" << audit.redeemed
           << " outstanding=" << audit.final_balance_total;
        const Money lhs = checked_add(audit.issued, audit.injected);
        const Money rhs = checked_add(audit.final_balance_total, audit.redeemed);
        if (lhs != rhs) {
            pass = false;
            os << "; value identity broken (" << lhs << " != " << rhs << ")";
        }
        if (audit.injected !=
            checked_add(audit.final_taint_total, audit.redeemed_taint)) {
            pass = false;
            os << "; counterfeit identity broken";
        }

        int corpus = 1; // the canonical run itself
        if (!ctx.scenario_dir.empty() && fs::is_directory(ctx.scenario_dir)) {
            for (const auto& e : fs::directory_iterator(ctx.scenario_dir)) {
                if (e.path().extension() != ".json")
                    continue;
                if (e.path().filename() == "street_corner.json")
                    continue; // that one is the canonical run above
                LoadResult lr = load_scenario_file(e.path().string());
                if (!lr.scenario) {
                    pass = false;
                    os << "; " << e.path().filename().string()
                       << " does not validate";
                    continue;
                }
                run_quiet(*lr.scenario); // throws if any night fails to close
                ++corpus;
            }
        }
        os << "; books closed nightly on " << corpus << " scenario runs";
        return make("conservation", pass, os.str());
    });
}

CheckResult check_determinism(Ctx& ctx) {
    return guarded("determinism", [&] {
        std::ostringstream os;
        bool pass = true;

        std::vector<std::string> shas = {ctx.sha_ledger_a};
        for (int i = 2; i <= 3; ++i) {
            const std::string dir = ctx.work + "/det" + std::to_string(i);
            RunOutput r = run_to_dir(ctx.flagship, dir);
            shas.push_back(sha256_hex_file(r.ledger_path));
            fs::remove_all(dir);
        }
        for (const auto& s : shas)
            if (s != shas[0])
                pass = false;
        os << "3 runs, ledger sha256 " << shas[0].substr(0, 16) << "... "
           << (pass ? "identical" : "NOT identical");

        Scenario alt = ctx.flagship;
        alt.seed = ctx.flagship.seed + 1;
        const std::string alt_dir = ctx.work + "/det_alt";
        RunOutput ralt = run_to_dir(alt, alt_dir);
        const std::string sha_alt = sha256_hex_file(ralt.ledger_path);
        fs::remove_all(alt_dir);
        if (sha_alt == shas[0]) {
            pass = false;
            os << "; seed change did NOT change the digest";
        } else {
            os << "; seed " << alt.seed << " digest differs as expected";
        }
        if (ralt.result.totals.issued == ctx.run_a.result.totals.issued &&
            ralt.result.record_count == ctx.run_a.result.record_count)
            os << " (note: totals coincide)";
        return make("determinism", pass, os.str());
    });
}

CheckResult check_injection_schedule(Ctx& ctx) {
    return guarded("injection-schedule", [&] {
        const std::vector<Money> plan = attack_daily_plan(ctx.flagship.attack);
        std::map<int, Money> by_day;
        for (const auto& r : ctx.ledger_a.records)
            if (r.type == TxType::counterfeit_injection) {
                const int d = int((r.date - ctx.flagship.start_date).count());
                by_day[d] = checked_add(by_day[d], r.amount);
            }
        bool pass = true;
        std::ostringstream os;
        os << "per-day injections [";
        for (std::size_t i = 0; i < plan.size(); ++i) {
            const int d = ctx.attack_day + int(i);
            const Money got = by_day.count(d) ? by_day[d] : 0;
            os << (i ? ", " : "") << got;
            if (got != plan[i])
                pass = false;
            by_day.erase(d);
        }
        os << "] vs planned [";
        for (std::size_t i = 0; i < plan.size(); ++i)
            os << (i ? ", " : "") << plan[i];
        os << "]";
        if (!by_day.empty()) {
            pass = false;
            os << "; " << by_day.size() << " injection day(s) outside the window";
        }
        return make("injection-schedule", pass, os.str());
    });
}

CheckResult check_containment(Ctx& ctx) {
    return guarded("containment", [&] {
        const Scenario& sc = ctx.flagship;
        const Date attack_end =
            sc.attack.start_date + std::chrono::days{sc.attack.n_days - 1};

        const std::set<EntityId> cfs = counterfeiter_ids(ctx.ledger_a);
        const std::set<EntityId> buyers = buyer_ids(ctx.ledger_a, cfs);
        const std::set<EntityId> locked_by_end =
            ctl_locked_ids(ctx.ledger_a, attack_end);

        int buyers_locked = 0;
        for (EntityId b : buyers)
            if (locked_by_end.count(b))
                ++buyers_locked;

        // Honest consumers: consumer-class purses that never bought
        // counterfeit value, over the whole run.
        const int consumer_class = sc.class_index("consumer");
        std::set<EntityId> consumers;
        for (const auto& r : ctx.ledger_a.records) {
            if (r.payer_class == consumer_class)
                consumers.insert(r.payer_id);
            if (r.payee_class == consumer_class)
                consumers.insert(r.payee_id);
        }
        const std::set<EntityId> locked_ever =
            ctl_locked_ids(ctx.ledger_a, sc.start_date + std::chrono::days{sc.days});
        int honest = 0, honest_locked = 0;
        for (EntityId c : consumers) {
            if (buyers.count(c) || cfs.count(c))
                continue;
            ++honest;
            if (locked_ever.count(c))
                ++honest_locked;
        }

        // The schedule must actually push each buyer past its lock point.
        Money planned = 0;
        for (Money m : attack_daily_plan(sc.attack))
            planned = checked_add(planned, m);
        const Money ctl = sc.consumers[1].ctl_limit;
        const bool dosed = double(planned) >=
                           1.2 * double(ctl) * double(buyers.empty() ? 1 : buyers.size());

        const double buyer_rate =
            buyers.empty() ? 0.0 : double(buyers_locked) / double(buyers.size());
        const double honest_rate =
            honest == 0 ? 0.0 : double(honest_locked) / double(honest);
        const bool pass = dosed && buyer_rate >= 0.95 && honest_rate <= 0.01;

        std::ostringstream os;
        os << buyers_locked << "/" << buyers.size()
           << " buyer purses locked by attack end (" << buyer_rate * 100.0
           << "%); " << honest_locked << "/" << honest
           << " honest consumer purses locked over the run ("
           << honest_rate * 100.0 << "%); planned injection " << planned
           << " vs 1.2x lock limit x buyers "
           << Money(1.2 * double(ctl)) * Money(buyers.size());
        return make("containment", pass, os.str());
    });
}

CheckResult check_currency_detection(Ctx& ctx) {
    return guarded("currency-detection", [&] {
        std::ostringstream os;
        bool pass = true;

        // Scale preconditions, measured with the monitor's own trailing
        // statistics on the eve of the attack.
        const auto ev = evaluate_day(ctx.run_a.result.redemptions, ctx.attack_day,
                                     ctx.flagship.detection.currency, 0,
                                     day_of_week(ctx.flagship.start_date));
        if (!ev) {
            pass = false;
            os << "monitor not warmed up by the attack day; ";
        } else {
            const double sd = ev->stddev;
            os << "baseline sd=" << std::int64_t(sd) << ": full="
               << ctx.flagship.attack.full_amount << " ("
               << double(ctx.flagship.attack.full_amount) / sd << " sd), test="
               << ctx.flagship.attack.test_amount << " ("
               << double(ctx.flagship.attack.test_amount) / sd << " sd)";
            if (double(ctx.flagship.attack.full_amount) < 5.0 * sd ||
                double(ctx.flagship.attack.test_amount) > sd) {
                pass = false;
                os << " OUTSIDE the required 5sd/1sd envelope";
            }
        }

        const auto& flags = ctx.run_a.result.currency_flag_days;
        const int want = ctx.attack_day + 1;
        if (flags.empty() || flags.front() != want) {
            pass = false;
            os << "; canonical first flag "
               << (flags.empty() ? std::string("none") : std::to_string(flags.front()))
               << " != day " << want;
        } else {
            os << "; canonical run first flag on day " << flags.front()
               << " (attack day 2)";
        }

        int hits = 0;
        const int mid_attack = attack_day_of(mid_scenario(ctx.mid_seeds[0]));
        for (std::size_t i = 0; i < ctx.mid_seeds.size(); ++i) {
            const auto& f = ctx.mid_run(i).currency_flag_days;
            if (!f.empty() && f.front() == mid_attack + 1)
                ++hits;
        }
        os << "; replicate seeds " << hits << "/" << ctx.mid_seeds.size()
           << " first-flag on attack day 2";
        if (hits * 10 < int(ctx.mid_seeds.size()) * 9)
            pass = false;
        return make("currency-detection", pass, os.str());
    });
}

CheckResult check_window_sensitivity([[maybe_unused]] Ctx& ctx) {
    return guarded("window-sensitivity", [&] {
        const std::vector<std::uint64_t> seeds = {901, 902, 903, 904, 905};
        const Money cap = 8000000;
        const Money tol = cap / 256;

        std::map<std::pair<std::uint64_t, Money>, std::vector<double>> cache;
        auto series_for = [&](std::uint64_t seed, Money amount)
            -> const std::vector<double>& {
            auto key = std::make_pair(seed, amount);
            auto it = cache.find(key);
            if (it == cache.end()) {
                Scenario sc = mid_scenario(seed);
                sc.attack.test_amount = 0;
                sc.attack.full_amount = amount;
                sc.detection.enabled = false; // scored off-line below
                it = cache.emplace(key, run_quiet(sc).redemptions).first;
            }
            return it->second;
        };

        const Scenario probe = mid_scenario(seeds[0]);
        const int attack_day = attack_day_of(probe);
        const int attack_len = probe.attack.n_days;
        const int dow = day_of_week(probe.start_date);

        auto detected = [&](DetectWindow w, std::uint64_t seed, Money amount) {
            DetectorCfg cfg = probe.detection.currency;
            cfg.window = w;
            const SeriesResult r = detect_series(series_for(seed, amount), cfg, 0, dow);
            const std::vector<int> days = r.flagged_days();
            if (days.empty())
                return false;
            // A monitor that cries wolf before the attack has not detected it.
            if (days.front() < attack_day)
                return false;
            return days.front() < attack_day + attack_len;
        };
        auto majority = [&](DetectWindow w, Money amount) {
            if (amount <= 0)
                return false;
            int hits = 0;
            for (std::uint64_t s : seeds)
                if (detected(w, s, amount))
                    ++hits;
            return 2 * hits > int(seeds.size());
        };
        // Smallest grid amount the window detects for most seeds; amounts the
        // window cannot detect even at the cap get a beyond-cap sentinel.
        auto threshold = [&](DetectWindow w) {
            if (!majority(w, cap))
                return cap * 2;
            Money lo = 0, hi = cap;
            while (hi - lo > tol) {
                const Money mid = lo + (hi - lo) / 2;
                if (majority(w, mid))
                    hi = mid;
                else
                    lo = mid;
            }
            return hi;
        };

        const Money s_daily = threshold(DetectWindow::daily);
        const Money s_weekly = threshold(DetectWindow::weekly);
        const Money s_monthly = threshold(DetectWindow::monthly);

        const bool pass =
            s_daily >= s_weekly && s_weekly >= s_monthly && s_monthly <= cap;
        std::ostringstream os;
        auto show = [&](Money s) {
            return s > cap ? std::string("beyond-cap") : std::to_string(s);
        };
        os << "smallest detectable injection: daily=" << show(s_daily)
           << " >= weekly=" << show(s_weekly)
           << " >= monthly=" << show(s_monthly) << " (cap " << cap << ", "
           << cache.size() << " simulated points, majority of " << seeds.size()
           << " seeds)";
        return make("window-sensitivity", pass, os.str());
    });
}

CheckResult check_merchant_system(Ctx& ctx) {
    return guarded("merchant-system-alarm", [&] {
        std::ostringstream os;
        bool pass = true;

        // Attack side: the population alarm must fire during the window.
        auto in_window = [](const std::vector<int>& days, int lo, int hi) {
            for (int d : days)
                if (d >= lo && d < hi)
                    return true;
            return false;
        };
        const bool canonical_hit =
            in_window(ctx.run_a.result.merchant_alarm_days, ctx.attack_day,
                      ctx.attack_day + ctx.flagship.attack.n_days);
        if (!canonical_hit)
            pass = false;
        os << "canonical run alarm in attack window: "
           << (canonical_hit ? "yes" : "NO");

        const int mid_attack = attack_day_of(mid_scenario(ctx.mid_seeds[0]));
        const int mid_len = mid_scenario(ctx.mid_seeds[0]).attack.n_days;
        int hits = 0;
        for (std::size_t i = 0; i < ctx.mid_seeds.size(); ++i)
            if (in_window(ctx.mid_run(i).merchant_alarm_days, mid_attack,
                          mid_attack + mid_len))
                ++hits;
        os << "; replicate seeds " << hits << "/" << ctx.mid_seeds.size();
        if (hits * 10 < int(ctx.mid_seeds.size()) * 9)
            pass = false;

        // Quiet side: with no attack, a stricter k must still stay silent.
        MerchantMonitorCfg strict = ctx.flagship.detection.merchants;
        strict.base.k = 3.0;
        strict.system_k = 3.0;
        long long flags = 0, evals = 0;
        int alarms = 0;
        for (std::uint64_t seed = 5301; seed <= 5320; ++seed) {
            const Scenario psc = purity_scenario(seed);
            const RunResult r = run_quiet(psc);
            const MerchantSystemResult m =
                detect_merchants(r.merchant_deposits, strict,
                                 r.merchant_first_active, day_of_week(psc.start_date));
            alarms += int(m.alarm_days().size());
            for (const auto& pm : m.per_merchant)
                for (std::size_t d = 0; d < pm.evaluated.size(); ++d) {
                    if (!pm.evaluated[d])
                        continue;
                    ++evals;
                    if (pm.flagged[d])
                        ++flags;
                }
        }
        const double rate = evals > 0 ? double(flags) / double(evals) : 0.0;
        os << "; 20 quiet seeds at k=3: " << alarms << " system alarms, "
           << "per-merchant flag rate " << rate * 100.0 << "% over " << evals
           << " evaluations";
        if (alarms != 0 || rate > 0.01 || evals == 0)
            pass = false;
        return make("merchant-system-alarm", pass, os.str());
    });
}

CheckResult check_generator_calibration([[maybe_unused]] Ctx& ctx) {
    return guarded("generator-calibration", [&] {
        std::ostringstream os;
        bool pass = true;
        const std::size_t n = 100000;

        {
            RngStream s(20240901, StreamKind::engine_misc, 1);
            std::vector<double> xs;
            xs.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
                xs.push_back(double(s.poisson(2.0)));
            const Moments m = moments_of(xs);
            // 3 standard errors at n=1e5: mean +-0.013416, variance +-0.03.
            const bool ok =
                std::fabs(m.mean - 2.0) <= 0.013416 && std::fabs(m.var - 2.0) <= 0.03;
            if (!ok)
                pass = false;
            os << "poisson(2): mean=" << m.mean << " var=" << m.var
               << (ok ? " ok" : " OUT OF BOUNDS");
        }
        {
            RngStream s(20240901, StreamKind::engine_misc, 2);
            std::vector<double> xs;
            xs.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
                xs.push_back(s.truncated_normal(50.0, 10.0, 0.0, 1e9));
            const Moments m = moments_of(xs);
            // Truncation at 5 sigma is immaterial; 3 SE bounds of the
            // untruncated moments apply: mean +-0.0949, sd +-0.0671.
            const bool ok = std::fabs(m.mean - 50.0) <= 0.0949 &&
                            std::fabs(std::sqrt(m.var) - 10.0) <= 0.0671;
            if (!ok)
                pass = false;
            os << "; truncated normal(50,10): mean=" << m.mean
               << " sd=" << std::sqrt(m.var) << (ok ? " ok" : " OUT OF BOUNDS");
        }

        // Log deposits of heavy-traffic merchants under a flat calendar
        // should look symmetric.
        const RunResult cal = run_quiet(calibration_scenario(7777));
        int qualifying = 0;
        double worst = 0.0;
        for (const auto& series : cal.merchant_deposits) {
            std::vector<double> logs;
            for (double dep : series)
                if (dep > 0.0)
                    logs.push_back(std::log1p(dep));
            if (logs.size() < 60)
                continue;
            ++qualifying;
            const Moments m = moments_of(logs);
            if (std::fabs(m.skew) > std::fabs(worst))
                worst = m.skew;
        }
        os << "; log-deposit symmetry over " << qualifying
           << " merchants with >=60 active days: worst skew " << worst;
        if (qualifying == 0 || std::fabs(worst) >= 1.0)
            pass = false;
        return make("generator-calibration", pass, os.str());
    });
}

CheckResult check_oracle_equivalence(Ctx& ctx) {
    return guarded("oracle-equivalence", [&] {
        std::ostringstream os;
        bool pass = true;

        // --- exact credit-turnover accounting on a 50-consumer instance ---
        const Scenario tiny = tiny_scenario(4242);
        CollectSink sink;
        const RunResult tr = run_simulation(tiny, sink);

        // Entity ids are handed out segment by segment in declaration order.
        std::map<EntityId, Money> limit;
        std::map<EntityId, bool> compromised;
        {
            EntityId next = 1;
            for (const auto& m : tiny.members)
                for (int i = 0; i < m.count; ++i)
                    limit[next++] = 0;
            for (const auto& c : tiny.consumers)
                for (int i = 0; i < c.count; ++i) {
                    limit[next] = c.ctl_limit;
                    compromised[next] = c.compromised;
                    ++next;
                }
            for (const auto& m : tiny.merchants)
                for (int i = 0; i < m.count; ++i)
                    limit[next++] = m.ctl_limit;
        }

        std::map<EntityId, Money> accum;
        std::map<EntityId, bool> locked;
        std::size_t crossings = 0, resets = 0;
        for (const auto& r : sink.records) {
            if (!pass)
                break;
            if (r.type == TxType::recustomization) {
                if (accum[r.payer_id] != r.aux) {
                    pass = false;
                    os << "reset of purse " << r.payer_id << " reports counter "
                       << r.aux << ", replay says " << accum[r.payer_id];
                }
                accum[r.payer_id] = 0;
                locked[r.payer_id] = false;
                ++resets;
                continue;
            }
            bool expect_cross = false;
            if (moves_value(r.type) && counts_toward_ctl(r.type) &&
                limit.count(r.payee_id) && limit[r.payee_id] > 0 &&
                !compromised[r.payee_id]) {
                const Money before = accum[r.payee_id];
                accum[r.payee_id] = checked_add(before, r.amount);
                if (before <= limit[r.payee_id] &&
                    accum[r.payee_id] > limit[r.payee_id] && !locked[r.payee_id]) {
                    expect_cross = true;
                    locked[r.payee_id] = true;
                    ++crossings;
                }
            }
            const bool recorded = (r.events & ev_ctl_exceeded) != 0;
            if (recorded != expect_cross) {
                pass = false;
                os << "tx " << r.tx_id << ": lock event " << recorded
                   << " but replayed accumulator says " << expect_cross;
            }
        }
        if (pass)
            os << "turnover counters exact over " << sink.records.size()
               << " rows (" << crossings << " lockups, " << resets << " resets)";
        if (crossings == 0 || resets == 0) {
            pass = false;
            os << "; instance exercised no lockups or no resets";
        }

        // --- model statistics against the independent oracle ---
        const int tiny_dow = day_of_week(tiny.start_date);
        std::vector<std::pair<std::string, std::string>> diffs;
        {
            DetectorCfg cfg = tiny.detection.currency;
            const std::string d =
                compare_series(tr.redemptions, cfg, 0, tiny_dow);
            if (!d.empty())
                diffs.emplace_back("tiny currency", d);
        }
        for (std::size_t mi = 0; mi < tr.merchant_deposits.size(); ++mi) {
            const std::string d =
                compare_series(tr.merchant_deposits[mi],
                               tiny.detection.merchants.base,
                               tr.merchant_first_active[mi], tiny_dow);
            if (!d.empty()) {
                diffs.emplace_back("tiny merchant " + std::to_string(mi), d);
                break;
            }
        }
        {
            // Broader coverage: the canonical series under every window and
            // both domains.
            for (DetectWindow w :
                 {DetectWindow::daily, DetectWindow::weekly, DetectWindow::monthly})
                for (DetectDomain dom : {DetectDomain::linear, DetectDomain::log})
                    for (bool seas : {false, true}) {
                        DetectorCfg cfg;
                        cfg.window = w;
                        cfg.domain = dom;
                        cfg.seasonal = seas;
                        cfg.k = 4.0;
                        const std::string d = compare_series(
                            ctx.run_a.result.redemptions, cfg, 0,
                            day_of_week(ctx.flagship.start_date));
                        if (!d.empty())
                            diffs.emplace_back(std::string("canonical ") +
                                                   to_string(w) + "/" +
                                                   to_string(dom),
                                               d);
                    }
        }
        // The population bound, recomputed directly.
        {
            const MerchantSystemResult m = detect_merchants(
                tr.merchant_deposits, tiny.detection.merchants,
                tr.merchant_first_active, tiny_dow);
            long long f = 0, e = 0;
            for (std::size_t d = 0; d < m.alarm.size(); ++d) {
                if (m.evaluated_per_day[d] > 0) {
                    double p = tiny.detection.merchants.p_hat_floor;
                    if (e > 0)
                        p = std::max(double(f) / double(e), p);
                    const double n = double(m.evaluated_per_day[d]);
                    const double bound =
                        n * p + tiny.detection.merchants.system_k *
                                    std::sqrt(n * p * (1.0 - p));
                    if (!close_rel(bound, m.threshold[d], 1e-9)) {
                        diffs.emplace_back("population bound day " + std::to_string(d),
                                           "recomputed " + std::to_string(bound) +
                                               " vs " + std::to_string(m.threshold[d]));
                        break;
                    }
                    if ((double(m.flags_per_day[d]) > bound) != (m.alarm[d] != 0)) {
                        diffs.emplace_back("population alarm day " + std::to_string(d),
                                           "verdict disagrees");
                        break;
                    }
                }
                f += m.flags_per_day[d];
                e += m.evaluated_per_day[d];
            }
        }
        if (!diffs.empty()) {
            pass = false;
            os << "; model statistics diverge: " << diffs[0].first << ": "
               << diffs[0].second;
        } else {
            os << "; monitor statistics match the oracle within 1e-9 everywhere";
        }
        return make("oracle-equivalence", pass, os.str());
    });
}

CheckResult check_taint_blindness(Ctx& ctx) {
    return guarded("taint-blindness", [&] {
        const DetectionCfg& cfg = ctx.flagship.detection;
        const DetectionReport before = analyze_ledger(ctx.ledger_a, cfg);

        LedgerData scrambled = ctx.ledger_a;
        RngStream rs(987654321, StreamKind::engine_misc, 99);
        for (std::size_t i = scrambled.records.size(); i > 1; --i) {
            const std::size_t j =
                std::size_t(rs.uniform_int(0, std::int64_t(i) - 1));
            std::swap(scrambled.records[i - 1].aux, scrambled.records[j].aux);
            std::swap(scrambled.records[i - 1].taint_flag,
                      scrambled.records[j].taint_flag);
        }
        const DetectionReport after = analyze_ledger(scrambled, cfg);

        bool pass = before.currency.flagged == after.currency.flagged &&
                    before.currency.z == after.currency.z &&
                    before.merchants.alarm == after.merchants.alarm &&
                    before.merchants.flags_per_day == after.merchants.flags_per_day &&
                    before.series.merchant_ids == after.series.merchant_ids;
        std::ostringstream os;
        os << "shuffled the counterfeit columns of " << scrambled.records.size()
           << " rows: monitor verdicts "
           << (pass ? "bit-identical" : "CHANGED");
        return make("taint-blindness", pass, os.str());
    });
}

} // namespace

std::vector<CheckResult> run_acceptance(const std::string& work_dir,
                                        const std::string& scenario_dir) {
    Ctx ctx;
    ctx.work = work_dir;
    ctx.scenario_dir = scenario_dir;
    fs::create_directories(work_dir);

    ctx.flagship = replication_scenario();
    ctx.attack_day = attack_day_of(ctx.flagship);
    ctx.mid_seeds = {4201, 4202, 4203, 4204, 4205,
                     4206, 4207, 4208, 4209, 4210};

    ctx.run_a = run_to_dir(ctx.flagship, work_dir + "/canonical");
    ctx.ledger_a = read_ledger(ctx.run_a.ledger_path);
    ctx.series_a = build_daily_series(ctx.ledger_a);
    ctx.sha_ledger_a = sha256_hex_file(ctx.run_a.ledger_path);

    std::vector<CheckResult> out;
    out.push_back(check_conservation(ctx));
    out.push_back(check_determinism(ctx));
    out.push_back(check_injection_schedule(ctx));
    out.push_back(check_containment(ctx));
    out.push_back(check_currency_detection(ctx));
    out.push_back(check_window_sensitivity(ctx));
    out.push_back(check_merchant_system(ctx));
    out.push_back(check_generator_calibration(ctx));
    out.push_back(check_oracle_equivalence(ctx));
    out.push_back(check_taint_blindness(ctx));
    return out;
}

std::vector<CheckResult> run_replication(const std::string& out_dir) {
    Ctx ctx;
    ctx.work = out_dir;
    ctx.flagship = replication_scenario();
    ctx.attack_day = attack_day_of(ctx.flagship);
    ctx.mid_seeds = {}; // canonical run only

    ctx.run_a = run_to_dir(ctx.flagship, out_dir);
    ctx.ledger_a = read_ledger(ctx.run_a.ledger_path);
    ctx.series_a = build_daily_series(ctx.ledger_a);
    ctx.sha_ledger_a = sha256_hex_file(ctx.run_a.ledger_path);

    const DetectionReport rep = analyze_ledger(ctx.ledger_a, ctx.flagship.detection);
    write_report_files(ctx.ledger_a, rep, out_dir);

    std::vector<CheckResult> out;
    out.push_back(check_conservation(ctx));
    out.push_back(check_injection_schedule(ctx));
    out.push_back(check_containment(ctx));
    // The multi-seed parts need the replicate set; here only the canonical
    // run's own timing is asserted.
    out.push_back(guarded("currency-detection", [&] {
        const auto& flags = ctx.run_a.result.currency_flag_days;
        const int want = ctx.attack_day + 1;
        const bool pass = !flags.empty() && flags.front() == want;
        std::ostringstream os;
        os << "expected first flag on day " << want << " (second attack day), got "
           << (flags.empty() ? std::string("none") : std::to_string(flags.front()));
        return make("currency-detection", pass, os.str());
    }));
    out.push_back(guarded("merchant-system-alarm", [&] {
        bool hit = false;
        for (int d : ctx.run_a.result.merchant_alarm_days)
            if (d >= ctx.attack_day &&
                d < ctx.attack_day + ctx.flagship.attack.n_days)
                hit = true;
        std::ostringstream os;
        os << "population alarm days in attack window:";
        bool any = false;
        for (int d : ctx.run_a.result.merchant_alarm_days)
            if (d >= ctx.attack_day &&
                d < ctx.attack_day + ctx.flagship.attack.n_days) {
                os << ' ' << d;
                any = true;
            }
        if (!any)
            os << " none";
        return make("merchant-system-alarm", hit, os.str());
    }));
    return out;
}

} // namespace ecsim
