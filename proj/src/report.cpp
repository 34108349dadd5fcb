#include "ecsim/report.hpp"

#include "ecsim/clock.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace ecsim {

using nlohmann::json;

DetectionReport analyze_ledger(const LedgerData& ledger, const DetectionCfg& cfg) {
    DetectionReport rep;
    rep.series = build_daily_series(ledger);
    const int dow = day_of_week(rep.series.start_date);
    rep.currency = detect_series(rep.series.redemptions, cfg.currency, 0, dow);
    rep.merchants = detect_merchants(rep.series.merchant_deposits, cfg.merchants,
                                     rep.series.merchant_first_active, dow);
    return rep;
}

namespace {

json day_list(const std::vector<int>& days, Date start) {
    json out = json::array();
    for (int d : days) {
        json e;
        e["day"] = d;
        e["date"] = format_date(start + std::chrono::days{d});
        out.push_back(e);
    }
    return out;
}

} // namespace

std::string detection_report_json(const LedgerData& ledger,
                                  const DetectionReport& rep) {
    json j;
    j["scenario"] = ledger.header.scenario_name;
    j["scenario_digest"] = ledger.header.scenario_digest;
    j["seed"] = ledger.header.seed;
    j["start_date"] = format_date(ledger.header.start_date);
    j["days"] = ledger.header.days;
    j["records"] = ledger.records.size();

    std::map<std::string, std::uint64_t> counts;
    std::map<std::string, Money> volume;
    std::uint64_t ctl_locks = 0, c3_locks = 0, recustomizations = 0;
    for (const auto& r : ledger.records) {
        counts[to_string(r.type)]++;
        if (moves_value(r.type))
            volume[to_string(r.type)] = checked_add(volume[to_string(r.type)], r.amount);
        if (r.events & ev_ctl_exceeded)
            ++ctl_locks;
        else if ((r.events & ev_purse_locked) && r.type == TxType::c3_delivery)
            ++c3_locks;
        if (r.events & ev_recustomized)
            ++recustomizations;
    }
    j["transactions"] = counts;
    j["volume"] = volume;
    j["autonomous_locks"] = ctl_locks;
    j["remote_locks"] = c3_locks;
    j["recustomizations"] = recustomizations;

    const ReplayResult audit = replay_ledger(ledger);
    j["audit"]["ok"] = audit.ok;
    if (!audit.ok)
        j["audit"]["error"] = audit.error;
    j["audit"]["issued"] = audit.issued;
    j["audit"]["injected"] = audit.injected;
    j["audit"]["redeemed"] = audit.redeemed;
    j["audit"]["counterfeit_retired"] = audit.redeemed_taint;
    j["audit"]["outstanding_balance"] = audit.final_balance_total;
    j["audit"]["outstanding_counterfeit"] = audit.final_taint_total;

    j["currency_monitor"]["flag_days"] =
        day_list(rep.currency.flagged_days(), ledger.header.start_date);
    j["merchant_monitor"]["alarm_days"] =
        day_list(rep.merchants.alarm_days(), ledger.header.start_date);
    int flagged_merchants = 0;
    for (std::size_t m = 0; m < rep.merchants.per_merchant.size(); ++m)
        if (!rep.merchants.per_merchant[m].flagged_days().empty())
            ++flagged_merchants;
    j["merchant_monitor"]["merchants_ever_flagged"] = flagged_merchants;
    j["merchant_monitor"]["merchants_observed"] = rep.series.merchant_ids.size();
    return j.dump(2);
}

std::string render_series_svg(const std::string& title,
                              const std::vector<double>& values,
                              const std::vector<char>& flagged) {
    const int w = 900, h = 300, ml = 60, mr = 15, mt = 30, mb = 25;
    const int pw = w - ml - mr, ph = h - mt - mb;
    double vmax = 1.0;
    for (double v : values)
        vmax = std::max(vmax, v);
    const double n = std::max<std::size_t>(values.size(), 2) - 1.0;
    auto X = [&](std::size_t i) { return ml + double(i) / n * pw; };
    auto Y = [&](double v) { return mt + (1.0 - v / vmax) * ph; };

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
       << h << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << ml << "' y='18' font-family='sans-serif' font-size='14'>"
       << title << "</text>\n";
    os << "<line x1='" << ml << "' y1='" << mt + ph << "' x2='" << ml + pw
       << "' y2='" << mt + ph << "' stroke='black'/>\n";
    os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
       << mt + ph << "' stroke='black'/>\n";
    os << "<text x='5' y='" << mt + 10
       << "' font-family='sans-serif' font-size='11'>" << std::int64_t(vmax)
       << "</text>\n";
    os << "<polyline fill='none' stroke='steelblue' stroke-width='1' points='";
    for (std::size_t i = 0; i < values.size(); ++i)
        os << X(i) << ',' << Y(values[i]) << ' ';
    os << "'/>\n";
    for (std::size_t i = 0; i < values.size() && i < flagged.size(); ++i)
        if (flagged[i])
            os << "<circle cx='" << X(i) << "' cy='" << Y(values[i])
               << "' r='4' fill='red'/>\n";
    os << "</svg>\n";
    return os.str();
}

std::string write_report_files(const LedgerData& ledger, const DetectionReport& rep,
                               const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::string summary_path = dir + "/summary.json";
    {
        std::ofstream out(summary_path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + summary_path);
        out << detection_report_json(ledger, rep) << '\n';
    }
    {
        std::ofstream out(dir + "/daily_series.tsv", std::ios::binary | std::ios::trunc);
        out << "day\tdate\tredemptions\tmerchant_deposits\tflagged_merchants\t"
               "currency_flag\tmerchant_alarm\n";
        for (int d = 0; d < rep.series.days; ++d) {
            double mdep = 0.0;
            for (const auto& s : rep.series.merchant_deposits)
                mdep += s[std::size_t(d)];
            out << d << '\t'
                << format_date(ledger.header.start_date + std::chrono::days{d})
                << '\t' << std::int64_t(rep.series.redemptions[std::size_t(d)])
                << '\t' << std::int64_t(mdep) << '\t'
                << (std::size_t(d) < rep.merchants.flags_per_day.size()
                        ? rep.merchants.flags_per_day[std::size_t(d)]
                        : 0)
                << '\t' << int(rep.currency.flagged[std::size_t(d)]) << '\t'
                << (std::size_t(d) < rep.merchants.alarm.size()
                        ? int(rep.merchants.alarm[std::size_t(d)])
                        : 0)
                << '\n';
        }
    }
    {
        std::ofstream out(dir + "/currency.svg", std::ios::binary | std::ios::trunc);
        out << render_series_svg("value returned to originator per day",
                                 rep.series.redemptions, rep.currency.flagged);
    }
    {
        std::vector<double> flags(rep.merchants.flags_per_day.begin(),
                                  rep.merchants.flags_per_day.end());
        std::ofstream out(dir + "/merchants.svg", std::ios::binary | std::ios::trunc);
        out << render_series_svg("merchants flagged per day",
                                 flags, rep.merchants.alarm);
    }
    return summary_path;
}

} // namespace ecsim
