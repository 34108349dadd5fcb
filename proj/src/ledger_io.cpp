#include "ecsim/ledger_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

namespace ecsim {

namespace {

constexpr const char* kColumns =
    "tx_id\tdate\thour\ttype\tpayer_id\tpayee_id\tpayer_class\tpayee_class\t"
    "amount\tpayer_balance_after\tpayee_balance_after\tevents\ttaint_flag\taux";

constexpr const char* kDenialColumns =
    "date\thour\ttype\tpayer_id\tpayee_id\tamount\treason";

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    return out;
}

template <class T>
T parse_num(const std::string& s, const char* what) {
    T v{};
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw std::invalid_argument(std::string("bad ") + what + " field '" + s + "'");
    return v;
}

void write_header(std::ofstream& out, const LedgerHeader& h, const char* columns,
                  const char* kind) {
    out << "# ecsim-" << kind << " v" << h.format_version << '\n';
    out << "# scenario: " << h.scenario_name << '\n';
    out << "# scenario_digest: " << h.scenario_digest << '\n';
    out << "# seed: " << h.seed << '\n';
    out << "# start_date: " << format_date(h.start_date) << '\n';
    out << "# days: " << h.days << '\n';
    out << "# columns: " << columns << '\n';
}

LedgerHeader parse_header_lines(std::istream& in, const char* kind) {
    LedgerHeader h;
    std::string line;
    bool first = true;
    while (in.peek() == '#') {
        std::getline(in, line);
        if (first) {
            const std::string want = std::string("# ecsim-") + kind + " v";
            if (line.rfind(want, 0) != 0)
                throw std::invalid_argument("not an ecsim " + std::string(kind) +
                                            " file: '" + line + "'");
            h.format_version = parse_num<int>(line.substr(want.size()), "format version");
            first = false;
            continue;
        }
        auto colon = line.find(": ");
        if (colon == std::string::npos)
            continue;
        const std::string key = line.substr(2, colon - 2);
        const std::string value = line.substr(colon + 2);
        if (key == "scenario")
            h.scenario_name = value;
        else if (key == "scenario_digest")
            h.scenario_digest = value;
        else if (key == "seed")
            h.seed = parse_num<std::uint64_t>(value, "seed");
        else if (key == "start_date")
            h.start_date = parse_date(value);
        else if (key == "days")
            h.days = parse_num<int>(value, "days");
    }
    if (first)
        throw std::invalid_argument(std::string("missing ") + kind + " header");
    return h;
}

} // namespace

std::string format_record(const TransactionRecord& r) {
    std::string out;
    out.reserve(160);
    out += std::to_string(r.tx_id);
    out += '\t';
    out += format_date(r.date);
    out += '\t';
    out += std::to_string(r.hour);
    out += '\t';
    out += to_string(r.type);
    out += '\t';
    out += std::to_string(r.payer_id);
    out += '\t';
    out += std::to_string(r.payee_id);
    out += '\t';
    out += std::to_string(r.payer_class);
    out += '\t';
    out += std::to_string(r.payee_class);
    out += '\t';
    out += std::to_string(r.amount);
    out += '\t';
    out += std::to_string(r.payer_balance_after);
    out += '\t';
    out += std::to_string(r.payee_balance_after);
    out += '\t';
    out += events_to_string(r.events);
    out += '\t';
    out += r.taint_flag ? '1' : '0';
    out += '\t';
    out += std::to_string(r.aux);
    return out;
}

TransactionRecord parse_record(const std::string& line) {
    auto f = split_tabs(line);
    if (f.size() != 14)
        throw std::invalid_argument("ledger row has " + std::to_string(f.size()) +
                                    " fields, expected 14");
    TransactionRecord r;
    r.tx_id = parse_num<std::uint64_t>(f[0], "tx_id");
    r.date = parse_date(f[1]);
    r.hour = parse_num<int>(f[2], "hour");
    r.type = tx_type_from_string(f[3]);
    r.payer_id = parse_num<std::uint64_t>(f[4], "payer_id");
    r.payee_id = parse_num<std::uint64_t>(f[5], "payee_id");
    r.payer_class = parse_num<int>(f[6], "payer_class");
    r.payee_class = parse_num<int>(f[7], "payee_class");
    r.amount = parse_num<Money>(f[8], "amount");
    r.payer_balance_after = parse_num<Money>(f[9], "payer_balance_after");
    r.payee_balance_after = parse_num<Money>(f[10], "payee_balance_after");
    r.events = events_from_string(f[11]);
    if (f[12] != "0" && f[12] != "1")
        throw std::invalid_argument("bad taint_flag field '" + f[12] + "'");
    r.taint_flag = f[12] == "1";
    r.aux = parse_num<Money>(f[13], "aux");
    return r;
}

std::string format_denial(const DenialEvent& d) {
    std::string out;
    out.reserve(96);
    out += format_date(d.date);
    out += '\t';
    out += std::to_string(d.hour);
    out += '\t';
    out += to_string(d.type);
    out += '\t';
    out += std::to_string(d.payer_id);
    out += '\t';
    out += std::to_string(d.payee_id);
    out += '\t';
    out += std::to_string(d.amount);
    out += '\t';
    out += to_string(d.reason);
    return out;
}

DenialEvent parse_denial(const std::string& line) {
    auto f = split_tabs(line);
    if (f.size() != 7)
        throw std::invalid_argument("denial row has " + std::to_string(f.size()) +
                                    " fields, expected 7");
    DenialEvent d;
    d.date = parse_date(f[0]);
    d.hour = parse_num<int>(f[1], "hour");
    d.type = tx_type_from_string(f[2]);
    d.payer_id = parse_num<std::uint64_t>(f[3], "payer_id");
    d.payee_id = parse_num<std::uint64_t>(f[4], "payee_id");
    d.amount = parse_num<Money>(f[5], "amount");
    d.reason = deny_reason_from_string(f[6]);
    return d;
}

TsvLedgerWriter::TsvLedgerWriter(const std::string& dir, const LedgerHeader& header)
    : ledger_path_(dir + "/ledger.tsv"), denials_path_(dir + "/denials.tsv") {
    ledger_.open(ledger_path_, std::ios::binary | std::ios::trunc);
    if (!ledger_)
        throw std::runtime_error("cannot open " + ledger_path_ + " for writing");
    denials_.open(denials_path_, std::ios::binary | std::ios::trunc);
    if (!denials_)
        throw std::runtime_error("cannot open " + denials_path_ + " for writing");
    write_header(ledger_, header, kColumns, "ledger");
    write_header(denials_, header, kDenialColumns, "denials");
}

TsvLedgerWriter::~TsvLedgerWriter() {
    close();
}

void TsvLedgerWriter::record(const TransactionRecord& r) {
    ledger_ << format_record(r) << '\n';
}

void TsvLedgerWriter::denial(const DenialEvent& d) {
    denials_ << format_denial(d) << '\n';
}

void TsvLedgerWriter::close() {
    if (ledger_.is_open()) {
        ledger_.close();
        if (!ledger_)
            throw std::runtime_error("write error on " + ledger_path_);
    }
    if (denials_.is_open()) {
        denials_.close();
        if (!denials_)
            throw std::runtime_error("write error on " + denials_path_);
    }
}

LedgerData read_ledger(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    LedgerData data;
    data.header = parse_header_lines(in, "ledger");
    std::string line;
    std::size_t lineno = 7;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        try {
            data.records.push_back(parse_record(line));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                                     e.what());
        }
    }
    return data;
}

std::vector<DenialEvent> read_denials(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    parse_header_lines(in, "denials");
    std::vector<DenialEvent> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty())
            out.push_back(parse_denial(line));
    }
    return out;
}

DailySeries build_daily_series(const LedgerData& ledger) {
    DailySeries s;
    s.start_date = ledger.header.start_date;
    s.days = ledger.header.days;
    if (s.days <= 0) {
        // Fall back to the observed span when the header lacks a day count.
        for (const auto& r : ledger.records)
            s.days = std::max(s.days,
                              int((r.date - s.start_date).count()) + 1);
    }
    s.redemptions.assign(std::size_t(s.days), 0.0);

    // Consumers may deposit too; a merchant is whoever the economy pays
    // purchases to (or who issues refunds), so only their deposits feed the
    // per-merchant monitor.
    std::set<EntityId> merchants;
    for (const auto& r : ledger.records) {
        if (r.type == TxType::purchase)
            merchants.insert(r.payee_id);
        else if (r.type == TxType::refund)
            merchants.insert(r.payer_id);
    }

    std::map<EntityId, std::vector<double>> per_merchant;
    std::map<EntityId, int> first_active;
    for (const auto& r : ledger.records) {
        const int d = int((r.date - s.start_date).count());
        if (d < 0 || d >= s.days)
            throw std::runtime_error("ledger row outside the run window");
        if (r.type == TxType::redemption)
            s.redemptions[std::size_t(d)] += double(r.amount);
        if (r.type == TxType::deposit && merchants.count(r.payer_id)) {
            auto [it, fresh] =
                per_merchant.try_emplace(r.payer_id, std::size_t(s.days), 0.0);
            it->second[std::size_t(d)] += double(r.amount);
            if (fresh)
                first_active[r.payer_id] = d;
        }
    }
    for (auto& [id, series] : per_merchant) {
        s.merchant_ids.push_back(id);
        s.merchant_deposits.push_back(std::move(series));
        s.merchant_first_active.push_back(first_active[id]);
    }
    return s;
}

ReplayResult replay_ledger(const LedgerData& ledger) {
    ReplayResult r;
    std::map<EntityId, Money> balance;
    std::map<EntityId, Money> taint;
    auto fail = [&](const TransactionRecord& rec, const std::string& why) {
        r.ok = false;
        r.error = "tx " + std::to_string(rec.tx_id) + ": " + why;
    };
    std::uint64_t prev_tx = 0;
    for (const auto& rec : ledger.records) {
        if (!r.ok)
            break;
        if (rec.tx_id <= prev_tx) {
            fail(rec, "transaction ids not strictly increasing");
            break;
        }
        prev_tx = rec.tx_id;
        if (moves_value(rec.type)) {
            if (rec.amount <= 0) {
                fail(rec, "non-positive amount");
                break;
            }
            const Money tm = rec.aux;
            if (tm < 0 || tm > rec.amount) {
                fail(rec, "counterfeit share outside [0, amount]");
                break;
            }
            if (rec.taint_flag != (tm > 0)) {
                fail(rec, "taint flag disagrees with counterfeit share");
                break;
            }
            switch (rec.type) {
            case TxType::issuance:
                balance[rec.payee_id] = checked_add(balance[rec.payee_id], rec.amount);
                r.issued = checked_add(r.issued, rec.amount);
                break;
            case TxType::redemption:
                balance[rec.payer_id] = checked_sub(balance[rec.payer_id], rec.amount);
                taint[rec.payer_id] = checked_sub(taint[rec.payer_id], tm);
                r.redeemed = checked_add(r.redeemed, rec.amount);
                r.redeemed_taint = checked_add(r.redeemed_taint, tm);
                break;
            case TxType::counterfeit_injection:
                balance[rec.payee_id] = checked_add(balance[rec.payee_id], rec.amount);
                taint[rec.payee_id] = checked_add(taint[rec.payee_id], rec.amount);
                r.injected = checked_add(r.injected, rec.amount);
                break;
            default:
                balance[rec.payer_id] = checked_sub(balance[rec.payer_id], rec.amount);
                balance[rec.payee_id] = checked_add(balance[rec.payee_id], rec.amount);
                taint[rec.payer_id] = checked_sub(taint[rec.payer_id], tm);
                taint[rec.payee_id] = checked_add(taint[rec.payee_id], tm);
                break;
            }
        }
        // Balances recorded on the row must match the replayed state.
        if (rec.payer_id != kOriginatorId) {
            if (balance[rec.payer_id] != rec.payer_balance_after) {
                fail(rec, "payer balance mismatch: replayed " +
                              std::to_string(balance[rec.payer_id]) + ", recorded " +
                              std::to_string(rec.payer_balance_after));
                break;
            }
            if (balance[rec.payer_id] < 0) {
                fail(rec, "payer balance went negative");
                break;
            }
            if (taint[rec.payer_id] < 0 || taint[rec.payer_id] > balance[rec.payer_id]) {
                fail(rec, "payer counterfeit holding outside [0, balance]");
                break;
            }
        }
        if (rec.payee_id != kOriginatorId) {
            if (balance[rec.payee_id] != rec.payee_balance_after) {
                fail(rec, "payee balance mismatch: replayed " +
                              std::to_string(balance[rec.payee_id]) + ", recorded " +
                              std::to_string(rec.payee_balance_after));
                break;
            }
            if (taint[rec.payee_id] < 0 || taint[rec.payee_id] > balance[rec.payee_id]) {
                fail(rec, "payee counterfeit holding outside [0, balance]");
                break;
            }
        }
    }
    for (const auto& [id, b] : balance) {
        (void)id;
        r.final_balance_total = checked_add(r.final_balance_total, b);
    }
    for (const auto& [id, t] : taint) {
        (void)id;
        r.final_taint_total = checked_add(r.final_taint_total, t);
    }
    if (r.ok) {
        const Money lhs = checked_add(r.issued, r.injected);
        const Money rhs = checked_add(r.final_balance_total, r.redeemed);
        if (lhs != rhs) {
            r.ok = false;
            r.error = "value identity broken: issued+injected=" + std::to_string(lhs) +
                      " vs balances+redeemed=" + std::to_string(rhs);
        } else if (r.injected !=
                   checked_add(r.final_taint_total, r.redeemed_taint)) {
            r.ok = false;
            r.error = "counterfeit identity broken";
        }
    }
    return r;
}

std::string sha256_hex(const void* data, std::size_t len) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int md_len = 0;
    if (!EVP_Digest(data, len, md, &md_len, EVP_sha256(), nullptr))
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(md_len * 2);
    for (unsigned int i = 0; i < md_len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

std::string sha256_hex(const std::string& s) {
    return sha256_hex(s.data(), s.size());
}

std::string sha256_hex_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx)
        throw std::runtime_error("SHA-256 context allocation failed");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        EVP_DigestUpdate(ctx, buf, std::size_t(in.gcount()));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int md_len = 0;
    EVP_DigestFinal_ex(ctx, md, &md_len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(md_len * 2);
    for (unsigned int i = 0; i < md_len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

} // namespace ecsim
