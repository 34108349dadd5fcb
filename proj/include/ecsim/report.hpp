#pragma once

#include "ecsim/detect.hpp"
#include "ecsim/ledger_io.hpp"

#include <string>

namespace ecsim {

/// Everything the off-line monitors conclude about a finished ledger.
struct DetectionReport {
    DailySeries series;
    SeriesResult currency;
    MerchantSystemResult merchants;
};

DetectionReport analyze_ledger(const LedgerData& ledger, const DetectionCfg& cfg);

/// Machine-readable summary (counts per type, monitor verdicts, audit
/// outcome) as a JSON text.
std::string detection_report_json(const LedgerData& ledger,
                                  const DetectionReport& rep);

/// Writes summary.json, daily_series.tsv, currency.svg and merchants.svg
/// under `dir`. Returns the summary path.
std::string write_report_files(const LedgerData& ledger, const DetectionReport& rep,
                               const std::string& dir);

/// Minimal one-series line chart with flagged days marked; presentation only.
std::string render_series_svg(const std::string& title,
                              const std::vector<double>& values,
                              const std::vector<char>& flagged);

} // namespace ecsim
