#pragma once

#include "ecsim/clock.hpp"
#include "ecsim/record.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace ecsim {

struct LedgerHeader {
    int format_version = 1;
    std::string scenario_name;
    std::string scenario_digest;
    std::uint64_t seed = 0;
    Date start_date{};
    int days = 0;
};

/// Where the engine streams its output. Implementations must be cheap:
/// the engine calls this for every transaction.
class LedgerSink {
public:
    virtual ~LedgerSink() = default;
    virtual void record(const TransactionRecord& r) = 0;
    virtual void denial(const DenialEvent& d) = 0;
};

class NullSink final : public LedgerSink {
public:
    void record(const TransactionRecord&) override {}
    void denial(const DenialEvent&) override {}
};

/// Keeps everything in memory; for tests and in-process analysis.
class CollectSink final : public LedgerSink {
public:
    void record(const TransactionRecord& r) override { records.push_back(r); }
    void denial(const DenialEvent& d) override { denials.push_back(d); }
    std::vector<TransactionRecord> records;
    std::vector<DenialEvent> denials;
};

/// Writes ledger.tsv and denials.tsv under `dir`. Tab-separated, one row per
/// transaction, '#'-prefixed header lines carrying run identity.
class TsvLedgerWriter final : public LedgerSink {
public:
    TsvLedgerWriter(const std::string& dir, const LedgerHeader& header);
    ~TsvLedgerWriter() override;
    void record(const TransactionRecord& r) override;
    void denial(const DenialEvent& d) override;
    void close();

    std::string ledger_path() const { return ledger_path_; }
    std::string denials_path() const { return denials_path_; }

private:
    std::string ledger_path_;
    std::string denials_path_;
    std::ofstream ledger_;
    std::ofstream denials_;
};

std::string format_record(const TransactionRecord& r);
TransactionRecord parse_record(const std::string& line);
std::string format_denial(const DenialEvent& d);
DenialEvent parse_denial(const std::string& line);

struct LedgerData {
    LedgerHeader header;
    std::vector<TransactionRecord> records;
};

LedgerData read_ledger(const std::string& path);
std::vector<DenialEvent> read_denials(const std::string& path);

/// Daily aggregates a detector consumes, rebuilt from ledger rows.
struct DailySeries {
    Date start_date{};
    int days = 0;
    std::vector<double> redemptions;  // value returned to the originator per day
    std::vector<EntityId> merchant_ids; // ids seen depositing, ascending
    std::vector<std::vector<double>> merchant_deposits; // [merchant][day]
    std::vector<int> merchant_first_active; // first day with a deposit
};

DailySeries build_daily_series(const LedgerData& ledger);

/// Re-derives every balance from amounts alone and checks each row's
/// recorded balance-after values, sign constraints, and the global
/// value/counterfeit identities. An independent audit of a finished ledger.
struct ReplayResult {
    bool ok = true;
    std::string error;       // first inconsistency found
    Money issued = 0;
    Money injected = 0;
    Money redeemed = 0;
    Money redeemed_taint = 0;
    Money final_balance_total = 0;
    Money final_taint_total = 0;
};

ReplayResult replay_ledger(const LedgerData& ledger);

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_hex_file(const std::string& path);

} // namespace ecsim
