#include "ecsim/scenario_io.hpp"

#include "ecsim/ledger_io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace ecsim {

using nlohmann::json;

namespace {

/// Error-collecting wrapper around a parsed document. Getters record a
/// problem and return the fallback instead of throwing, so one pass yields
/// every error in the file.
class V {
public:
    std::vector<ValidationError> errors;

    void err(const std::string& path, const std::string& msg) {
        errors.push_back({path, msg});
    }

    const json* get(const json& j, const std::string& key) {
        auto it = j.find(key);
        return it == j.end() ? nullptr : &*it;
    }

    bool obj(const json& j, const std::string& path) {
        if (!j.is_object()) {
            err(path, "expected an object");
            return false;
        }
        return true;
    }

    void known_keys(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        if (!j.is_object())
            return;
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* a : allowed)
                if (it.key() == a)
                    ok = true;
            if (!ok)
                err(path + "/" + it.key(), "unknown key");
        }
    }

    double number(const json& j, const std::string& path, const std::string& key,
                  bool required, double def) {
        const json* v = get(j, key);
        if (!v) {
            if (required)
                err(path + "/" + key, "missing required number");
            return def;
        }
        if (!v->is_number()) {
            err(path + "/" + key, "expected a number");
            return def;
        }
        return v->get<double>();
    }

    std::int64_t integer(const json& j, const std::string& path,
                         const std::string& key, bool required, std::int64_t def) {
        const json* v = get(j, key);
        if (!v) {
            if (required)
                err(path + "/" + key, "missing required integer");
            return def;
        }
        if (!v->is_number_integer()) {
            err(path + "/" + key, "expected an integer (amounts are minor units)");
            return def;
        }
        return v->get<std::int64_t>();
    }

    std::uint64_t uinteger(const json& j, const std::string& path,
                           const std::string& key, bool required, std::uint64_t def) {
        const json* v = get(j, key);
        if (!v) {
            if (required)
                err(path + "/" + key, "missing required integer");
            return def;
        }
        if (!v->is_number_integer() ||
            (!v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
            err(path + "/" + key, "expected a non-negative integer");
            return def;
        }
        return v->get<std::uint64_t>();
    }

    std::string str(const json& j, const std::string& path, const std::string& key,
                    bool required, const std::string& def) {
        const json* v = get(j, key);
        if (!v) {
            if (required)
                err(path + "/" + key, "missing required string");
            return def;
        }
        if (!v->is_string()) {
            err(path + "/" + key, "expected a string");
            return def;
        }
        return v->get<std::string>();
    }

    bool boolean(const json& j, const std::string& path, const std::string& key,
                 bool required, bool def) {
        const json* v = get(j, key);
        if (!v) {
            if (required)
                err(path + "/" + key, "missing required boolean");
            return def;
        }
        if (!v->is_boolean()) {
            err(path + "/" + key, "expected a boolean");
            return def;
        }
        return v->get<bool>();
    }

    Date date(const json& j, const std::string& path, const std::string& key,
              bool required, Date def) {
        const std::string s = str(j, path, key, required, "");
        if (s.empty())
            return def;
        try {
            return parse_date(s);
        } catch (const std::exception& e) {
            err(path + "/" + key, e.what());
            return def;
        }
    }

    void range(double v, double lo, double hi, const std::string& path,
               const std::string& what) {
        if (v < lo || v > hi) {
            std::ostringstream os;
            os << what << " must be in [" << lo << ", " << hi << "], got " << v;
            err(path, os.str());
        }
    }
};

AmountDist parse_amount(V& v, const json& j, const std::string& path,
                        AmountDist a = AmountDist{}) {
    if (!v.obj(j, path))
        return a;
    v.known_keys(j, path, {"mean", "stddev", "min", "max"});
    a.mean = v.number(j, path, "mean", true, 0.0);
    a.stddev = v.number(j, path, "stddev", false, 0.0);
    a.min = v.integer(j, path, "min", false, a.min);
    a.max = v.integer(j, path, "max", false, a.max);
    if (a.mean < 0)
        v.err(path + "/mean", "must be >= 0");
    if (a.stddev < 0)
        v.err(path + "/stddev", "must be >= 0");
    if (a.min < 0)
        v.err(path + "/min", "must be >= 0");
    if (a.max < a.min)
        v.err(path + "/max", "must be >= min");
    return a;
}

PoissonActivity parse_activity(V& v, const json& j, const std::string& path) {
    PoissonActivity p;
    if (!v.obj(j, path))
        return p;
    v.known_keys(j, path, {"lambda", "amount"});
    p.lambda = v.number(j, path, "lambda", true, 0.0);
    if (p.lambda < 0)
        v.err(path + "/lambda", "must be >= 0");
    if (const json* a = v.get(j, "amount"))
        p.amount = parse_amount(v, *a, path + "/amount");
    else if (p.lambda > 0)
        v.err(path + "/amount", "missing amount distribution for positive rate");
    return p;
}

int line_of_offset(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n')
            ++line;
    return line;
}

} // namespace

std::string scenario_digest_of_text(const std::string& json_text) {
    const json j = json::parse(json_text);
    return sha256_hex(j.dump());
}

LoadResult load_scenario_json(const std::string& text) {
    LoadResult out;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        out.errors.push_back(
            {"(syntax)", "line " + std::to_string(line_of_offset(text, e.byte)) +
                             ": " + e.what()});
        return out;
    }

    V v;
    Scenario sc;
    sc.digest = sha256_hex(root.dump());

    if (!v.obj(root, "")) {
        out.errors = v.errors;
        return out;
    }
    v.known_keys(root, "", {"name", "simulator", "calendar", "classes",
                            "class_matrix", "segments", "attack", "c3_script",
                            "detection"});

    sc.name = v.str(root, "", "name", true, "unnamed");

    // --- simulator ---------------------------------------------------------
    if (const json* sim = v.get(root, "simulator")) {
        const std::string p = "/simulator";
        if (v.obj(*sim, p)) {
            v.known_keys(*sim, p,
                         {"seed", "member_contact_rate", "recustomize_on_lock_p"});
            sc.seed = v.uinteger(*sim, p, "seed", true, 1);
            sc.member_contact_rate =
                v.number(*sim, p, "member_contact_rate", false, sc.member_contact_rate);
            v.range(sc.member_contact_rate, 0.0, 1.0, p + "/member_contact_rate",
                    "member_contact_rate");
            sc.recustomize_on_lock_p = v.number(*sim, p, "recustomize_on_lock_p",
                                                false, sc.recustomize_on_lock_p);
            v.range(sc.recustomize_on_lock_p, 0.0, 1.0, p + "/recustomize_on_lock_p",
                    "recustomize_on_lock_p");
        }
    } else {
        v.err("/simulator", "missing required section");
    }

    // --- calendar ----------------------------------------------------------
    if (const json* cal = v.get(root, "calendar")) {
        const std::string p = "/calendar";
        if (v.obj(*cal, p)) {
            v.known_keys(*cal, p, {"start_date", "days", "holidays", "dow_factors",
                                   "holiday_factor"});
            sc.start_date = v.date(*cal, p, "start_date", true, Date{});
            sc.days = int(v.integer(*cal, p, "days", true, 0));
            if (sc.days < 1)
                v.err(p + "/days", "must be >= 1");
            if (const json* h = v.get(*cal, "holidays")) {
                if (!h->is_array())
                    v.err(p + "/holidays", "expected an array of dates");
                else
                    for (std::size_t i = 0; i < h->size(); ++i) {
                        const std::string hp = p + "/holidays/" + std::to_string(i);
                        if (!(*h)[i].is_string()) {
                            v.err(hp, "expected a date string");
                            continue;
                        }
                        try {
                            sc.holidays.insert(parse_date((*h)[i].get<std::string>()));
                        } catch (const std::exception& e) {
                            v.err(hp, e.what());
                        }
                    }
            }
            if (const json* f = v.get(*cal, "dow_factors")) {
                if (!f->is_array() || f->size() != 7)
                    v.err(p + "/dow_factors",
                          "expected 7 numbers (Monday through Sunday)");
                else
                    for (std::size_t i = 0; i < 7; ++i) {
                        if (!(*f)[i].is_number()) {
                            v.err(p + "/dow_factors/" + std::to_string(i),
                                  "expected a number");
                            continue;
                        }
                        sc.dow_factors[i] = (*f)[i].get<double>();
                        if (sc.dow_factors[i] <= 0)
                            v.err(p + "/dow_factors/" + std::to_string(i),
                                  "must be > 0");
                    }
            }
            sc.holiday_factor =
                v.number(*cal, p, "holiday_factor", false, sc.holiday_factor);
            if (sc.holiday_factor < 0)
                v.err(p + "/holiday_factor", "must be >= 0");
        }
    } else {
        v.err("/calendar", "missing required section");
    }

    // --- classes & matrix ----------------------------------------------------
    if (const json* cls = v.get(root, "classes")) {
        if (!cls->is_array() || cls->empty())
            v.err("/classes", "expected a non-empty array of class names");
        else
            for (std::size_t i = 0; i < cls->size(); ++i) {
                if (!(*cls)[i].is_string()) {
                    v.err("/classes/" + std::to_string(i), "expected a string");
                    continue;
                }
                const std::string name = (*cls)[i].get<std::string>();
                if (sc.class_index(name) >= 0)
                    v.err("/classes/" + std::to_string(i),
                          "duplicate class name '" + name + "'");
                sc.classes.push_back(name);
            }
    } else {
        v.err("/classes", "missing required section");
    }

    auto class_ref = [&](const json& j, const std::string& path,
                         const std::string& key) {
        const std::string name = v.str(j, path, key, true, "");
        if (name.empty())
            return -1;
        const int id = sc.class_index(name);
        if (id < 0)
            v.err(path + "/" + key, "unknown class '" + name + "'");
        return id;
    };

    if (const json* mx = v.get(root, "class_matrix")) {
        if (!mx->is_array())
            v.err("/class_matrix", "expected an array");
        else
            for (std::size_t i = 0; i < mx->size(); ++i) {
                const std::string p = "/class_matrix/" + std::to_string(i);
                const json& e = (*mx)[i];
                if (!v.obj(e, p))
                    continue;
                v.known_keys(e, p, {"payer", "payee", "types"});
                const int payer = class_ref(e, p, "payer");
                const int payee = class_ref(e, p, "payee");
                const json* types = v.get(e, "types");
                if (!types || !types->is_array() || types->empty()) {
                    v.err(p + "/types", "expected a non-empty array of types");
                    continue;
                }
                for (std::size_t t = 0; t < types->size(); ++t) {
                    const std::string tp = p + "/types/" + std::to_string(t);
                    if (!(*types)[t].is_string()) {
                        v.err(tp, "expected a string");
                        continue;
                    }
                    try {
                        const TxType tt =
                            tx_type_from_string((*types)[t].get<std::string>());
                        if (payer >= 0 && payee >= 0)
                            sc.matrix_entries.emplace_back(payer, payee, tt);
                    } catch (const std::exception& e2) {
                        v.err(tp, e2.what());
                    }
                }
            }
    } else {
        v.err("/class_matrix", "missing required section");
    }

    // --- segments -------------------------------------------------------------
    std::vector<std::string> segment_names;
    auto note_segment_name = [&](const std::string& name, const std::string& path) {
        for (const auto& n : segment_names)
            if (n == name)
                v.err(path, "duplicate segment name '" + name + "'");
        segment_names.push_back(name);
    };

    const json* segs = v.get(root, "segments");
    if (!segs) {
        v.err("/segments", "missing required section");
    } else if (v.obj(*segs, "/segments")) {
        v.known_keys(*segs, "/segments", {"members", "consumers", "merchants"});
        if (const json* ms = v.get(*segs, "members")) {
            if (!ms->is_array() || ms->empty())
                v.err("/segments/members", "expected a non-empty array");
            else
                for (std::size_t i = 0; i < ms->size(); ++i) {
                    const std::string p = "/segments/members/" + std::to_string(i);
                    const json& e = (*ms)[i];
                    MemberSegmentCfg m;
                    if (!v.obj(e, p))
                        continue;
                    v.known_keys(e, p, {"name", "count", "class", "counterfeit"});
                    m.name = v.str(e, p, "name", true, "");
                    m.count = int(v.integer(e, p, "count", true, 1));
                    if (m.count < 1)
                        v.err(p + "/count", "must be >= 1");
                    m.class_id = class_ref(e, p, "class");
                    m.counterfeit = v.boolean(e, p, "counterfeit", false, false);
                    note_segment_name(m.name, p + "/name");
                    sc.members.push_back(m);
                }
        } else {
            v.err("/segments/members", "missing required list");
        }
        if (const json* cs = v.get(*segs, "consumers")) {
            if (!cs->is_array())
                v.err("/segments/consumers", "expected an array");
            else
                for (std::size_t i = 0; i < cs->size(); ++i) {
                    const std::string p = "/segments/consumers/" + std::to_string(i);
                    const json& e = (*cs)[i];
                    ConsumerSegmentCfg c;
                    if (!v.obj(e, p))
                        continue;
                    v.known_keys(e, p,
                                 {"name", "count", "class", "member",
                                  "initial_balance", "purse_limit", "ctl_limit",
                                  "purchase", "withdrawal", "peer_transfer",
                                  "deposit", "circle_size", "in_circle_p",
                                  "circle_merchant_segment", "compromised",
                                  "monthly_birth_rate", "monthly_death_rate"});
                    c.name = v.str(e, p, "name", true, "");
                    c.count = int(v.integer(e, p, "count", true, 0));
                    if (c.count < 0)
                        v.err(p + "/count", "must be >= 0");
                    c.class_id = class_ref(e, p, "class");
                    c.initial_balance.min = 0; // an empty starting purse is fine
                    if (const json* b = v.get(e, "initial_balance"))
                        c.initial_balance = parse_amount(v, *b, p + "/initial_balance",
                                                         c.initial_balance);
                    c.purse_limit = v.integer(e, p, "purse_limit", false, 0);
                    c.ctl_limit = v.integer(e, p, "ctl_limit", false, 0);
                    if (c.purse_limit < 0)
                        v.err(p + "/purse_limit", "must be >= 0");
                    if (c.ctl_limit < 0)
                        v.err(p + "/ctl_limit", "must be >= 0");
                    if (const json* a = v.get(e, "purchase"))
                        c.purchase = parse_activity(v, *a, p + "/purchase");
                    if (const json* a = v.get(e, "withdrawal"))
                        c.withdrawal = parse_activity(v, *a, p + "/withdrawal");
                    if (const json* a = v.get(e, "peer_transfer"))
                        c.peer_transfer = parse_activity(v, *a, p + "/peer_transfer");
                    if (const json* a = v.get(e, "deposit"))
                        c.deposit = parse_activity(v, *a, p + "/deposit");
                    c.circle_size = int(v.integer(e, p, "circle_size", false, 4));
                    if (c.circle_size < 0)
                        v.err(p + "/circle_size", "must be >= 0");
                    c.in_circle_p = v.number(e, p, "in_circle_p", false, 0.9);
                    v.range(c.in_circle_p, 0.0, 1.0, p + "/in_circle_p", "in_circle_p");
                    c.compromised = v.boolean(e, p, "compromised", false, false);
                    c.monthly_birth_rate =
                        v.number(e, p, "monthly_birth_rate", false, 0.0);
                    c.monthly_death_rate =
                        v.number(e, p, "monthly_death_rate", false, 0.0);
                    v.range(c.monthly_death_rate, 0.0, 1.0, p + "/monthly_death_rate",
                            "monthly_death_rate");
                    if (c.monthly_birth_rate < 0)
                        v.err(p + "/monthly_birth_rate", "must be >= 0");
                    note_segment_name(c.name, p + "/name");
                    sc.consumers.push_back(c);
                }
        }
        if (const json* ms = v.get(*segs, "merchants")) {
            if (!ms->is_array())
                v.err("/segments/merchants", "expected an array");
            else
                for (std::size_t i = 0; i < ms->size(); ++i) {
                    const std::string p = "/segments/merchants/" + std::to_string(i);
                    const json& e = (*ms)[i];
                    MerchantSegmentCfg m;
                    if (!v.obj(e, p))
                        continue;
                    v.known_keys(e, p, {"name", "count", "class", "member",
                                        "purse_limit", "ctl_limit", "deposit_float",
                                        "refund_p", "refund_fraction"});
                    m.name = v.str(e, p, "name", true, "");
                    m.count = int(v.integer(e, p, "count", true, 0));
                    if (m.count < 0)
                        v.err(p + "/count", "must be >= 0");
                    m.class_id = class_ref(e, p, "class");
                    m.purse_limit = v.integer(e, p, "purse_limit", false, 0);
                    m.ctl_limit = v.integer(e, p, "ctl_limit", false, 0);
                    m.deposit_float = v.integer(e, p, "deposit_float", false, 0);
                    if (m.purse_limit < 0)
                        v.err(p + "/purse_limit", "must be >= 0");
                    if (m.ctl_limit < 0)
                        v.err(p + "/ctl_limit", "must be >= 0");
                    if (m.deposit_float < 0)
                        v.err(p + "/deposit_float", "must be >= 0");
                    m.refund_p = v.number(e, p, "refund_p", false, 0.0);
                    v.range(m.refund_p, 0.0, 1.0, p + "/refund_p", "refund_p");
                    m.refund_fraction = v.number(e, p, "refund_fraction", false, 0.0);
                    v.range(m.refund_fraction, 0.0, 1.0, p + "/refund_fraction",
                            "refund_fraction");
                    note_segment_name(m.name, p + "/name");
                    sc.merchants.push_back(m);
                }
        }
    }

    // Member references can only be resolved once all segments are known.
    auto member_segment_ref = [&](const json& e, const std::string& p) {
        const std::string name = v.str(e, p, "member", true, "");
        if (name.empty())
            return 0;
        const int g = sc.segment_index(name);
        if (g < 0 || std::size_t(g) >= sc.members.size()) {
            v.err(p + "/member", "'" + name + "' is not a member segment");
            return 0;
        }
        return g;
    };
    if (segs && segs->is_object()) {
        if (const json* cs = v.get(*segs, "consumers"); cs && cs->is_array())
            for (std::size_t i = 0; i < cs->size() && i < sc.consumers.size(); ++i) {
                const std::string p = "/segments/consumers/" + std::to_string(i);
                sc.consumers[i].member_segment = member_segment_ref((*cs)[i], p);
                if (const json* cms = v.get((*cs)[i], "circle_merchant_segment")) {
                    if (!cms->is_string()) {
                        v.err(p + "/circle_merchant_segment", "expected a string");
                    } else {
                        const int g = sc.segment_index(cms->get<std::string>());
                        const int first_merchant =
                            int(sc.members.size() + sc.consumers.size());
                        if (g < first_merchant)
                            v.err(p + "/circle_merchant_segment",
                                  "'" + cms->get<std::string>() +
                                      "' is not a merchant segment");
                        else
                            sc.consumers[i].circle_merchant_segment = g;
                    }
                }
            }
        if (const json* ms = v.get(*segs, "merchants"); ms && ms->is_array())
            for (std::size_t i = 0; i < ms->size() && i < sc.merchants.size(); ++i) {
                const std::string p = "/segments/merchants/" + std::to_string(i);
                sc.merchants[i].member_segment = member_segment_ref((*ms)[i], p);
            }
    }

    // --- attack -----------------------------------------------------------------
    if (const json* at = v.get(root, "attack")) {
        const std::string p = "/attack";
        if (v.obj(*at, p)) {
            v.known_keys(*at, p,
                         {"enabled", "start_date", "n_days", "stand_down_day",
                          "test_amount", "full_amount", "counterfeiter_segment",
                          "buyer_segment", "batch", "sale_hours", "spend"});
            AttackCfg& a = sc.attack;
            a.enabled = v.boolean(*at, p, "enabled", false, true);
            a.start_date = v.date(*at, p, "start_date", a.enabled, Date{});
            a.n_days = int(v.integer(*at, p, "n_days", a.enabled, 0));
            a.stand_down_day = int(v.integer(*at, p, "stand_down_day", false, 3));
            a.test_amount = v.integer(*at, p, "test_amount", a.enabled, 0);
            a.full_amount = v.integer(*at, p, "full_amount", a.enabled, 0);
            if (a.enabled) {
                if (a.n_days < 3)
                    v.err(p + "/n_days", "must be >= 3 (test day, stand-down day "
                                         "and at least one full day)");
                if (a.stand_down_day < 1 || (a.n_days >= 1 && a.stand_down_day > a.n_days))
                    v.err(p + "/stand_down_day", "must be within 1..n_days");
                if (a.test_amount < 0)
                    v.err(p + "/test_amount", "must be >= 0");
                if (a.full_amount <= 0)
                    v.err(p + "/full_amount", "must be > 0");
            }
            auto consumer_segment_ref = [&](const std::string& key) {
                const std::string name = v.str(*at, p, key, a.enabled, "");
                if (name.empty())
                    return -1;
                const int g = sc.segment_index(name);
                const int first = int(sc.members.size());
                const int last = first + int(sc.consumers.size());
                if (g < first || g >= last) {
                    v.err(p + "/" + key, "'" + name + "' is not a consumer segment");
                    return -1;
                }
                return g;
            };
            const int cfseg = consumer_segment_ref("counterfeiter_segment");
            if (cfseg >= 0) {
                a.counterfeiter_segment = cfseg;
                if (!sc.consumers[std::size_t(cfseg) - sc.members.size()].compromised)
                    v.err(p + "/counterfeiter_segment",
                          "counterfeiter segment must be compromised");
            }
            const int bseg = consumer_segment_ref("buyer_segment");
            if (bseg >= 0) {
                a.buyer_segment = bseg;
                if (sc.consumers[std::size_t(bseg) - sc.members.size()].compromised)
                    v.err(p + "/buyer_segment",
                          "buyer segment must not be compromised");
            }
            if (const json* b = v.get(*at, "batch"))
                a.batch = parse_amount(v, *b, p + "/batch");
            else if (a.enabled)
                v.err(p + "/batch", "missing batch distribution");
            if (const json* h = v.get(*at, "sale_hours")) {
                if (!h->is_array() || h->size() != 2 || !(*h)[0].is_number_integer() ||
                    !(*h)[1].is_number_integer()) {
                    v.err(p + "/sale_hours", "expected [first_hour, last_hour]");
                } else {
                    a.sale_hour_lo = (*h)[0].get<int>();
                    a.sale_hour_hi = (*h)[1].get<int>();
                    if (a.sale_hour_lo < 0 || a.sale_hour_hi > 23 ||
                        a.sale_hour_lo > a.sale_hour_hi)
                        v.err(p + "/sale_hours", "need 0 <= first <= last <= 23");
                }
            }
            if (const json* sp = v.get(*at, "spend")) {
                const std::string spp = p + "/spend";
                if (v.obj(*sp, spp)) {
                    v.known_keys(*sp, spp, {"lambda", "amount", "days_after"});
                    a.spend_lambda = v.number(*sp, spp, "lambda", true, 0.0);
                    if (a.spend_lambda < 0)
                        v.err(spp + "/lambda", "must be >= 0");
                    if (const json* am = v.get(*sp, "amount"))
                        a.spend_amount = parse_amount(v, *am, spp + "/amount");
                    else if (a.spend_lambda > 0)
                        v.err(spp + "/amount", "missing amount distribution");
                    a.spend_days_after =
                        int(v.integer(*sp, spp, "days_after", false, 0));
                    if (a.spend_days_after < 0)
                        v.err(spp + "/days_after", "must be >= 0");
                }
            }
            // The whole injection schedule must land inside the run.
            if (a.enabled && sc.days > 0 && a.start_date != Date{}) {
                const int ad = int((a.start_date - sc.start_date).count());
                if (ad < 0 || ad + a.n_days > sc.days)
                    v.err(p + "/start_date",
                          "attack days fall outside the simulated window");
            }
        }
    }

    // --- c3 script ----------------------------------------------------------------
    if (const json* script = v.get(root, "c3_script")) {
        if (!script->is_array())
            v.err("/c3_script", "expected an array");
        else if (script->size() > 64)
            v.err("/c3_script", "at most 64 commands are supported");
        else
            for (std::size_t i = 0; i < script->size(); ++i) {
                const std::string p = "/c3_script/" + std::to_string(i);
                const json& e = (*script)[i];
                C3ScriptEntry entry;
                entry.cmd.id = int(i);
                if (!v.obj(e, p))
                    continue;
                v.known_keys(e, p, {"action", "target", "trigger", "param", "members"});
                try {
                    entry.cmd.action =
                        c3_action_from_string(v.str(e, p, "action", true, "lock"));
                } catch (const std::exception& ex) {
                    v.err(p + "/action", ex.what());
                }
                entry.cmd.param = v.integer(e, p, "param", false, 0);
                if ((entry.cmd.action == C3Action::set_ctl_limit ||
                     entry.cmd.action == C3Action::set_purse_limit) &&
                    entry.cmd.param < 0)
                    v.err(p + "/param", "limit must be >= 0");
                if (const json* t = v.get(e, "target")) {
                    const std::string tp = p + "/target";
                    if (v.obj(*t, tp)) {
                        v.known_keys(*t, tp, {"kind", "class", "segment", "purse_id"});
                        const std::string kind = v.str(*t, tp, "kind", true, "all");
                        if (kind == "all") {
                            entry.cmd.target_kind = C3TargetKind::all_purses;
                        } else if (kind == "class") {
                            entry.cmd.target_kind = C3TargetKind::by_class;
                            entry.cmd.target = class_ref(*t, tp, "class");
                        } else if (kind == "segment") {
                            entry.cmd.target_kind = C3TargetKind::by_segment;
                            const std::string name = v.str(*t, tp, "segment", true, "");
                            const int g = sc.segment_index(name);
                            if (g < int(sc.members.size()))
                                v.err(tp + "/segment",
                                      "'" + name + "' is not a purse segment");
                            else
                                entry.cmd.target = g;
                        } else if (kind == "purse") {
                            entry.cmd.target_kind = C3TargetKind::by_purse_id;
                            entry.cmd.target = v.integer(*t, tp, "purse_id", true, 0);
                            if (entry.cmd.target < 1)
                                v.err(tp + "/purse_id", "must be >= 1");
                        } else {
                            v.err(tp + "/kind",
                                  "expected one of all/class/segment/purse");
                        }
                    }
                } else {
                    v.err(p + "/target", "missing required object");
                }
                if (const json* t = v.get(e, "trigger")) {
                    const std::string tp = p + "/trigger";
                    if (v.obj(*t, tp)) {
                        v.known_keys(*t, tp, {"date", "alarm", "delay_days"});
                        const bool has_date = t->contains("date");
                        const bool has_alarm = t->contains("alarm");
                        if (has_date == has_alarm) {
                            v.err(tp, "exactly one of date/alarm is required");
                        } else if (has_date) {
                            entry.at_date = v.date(*t, tp, "date", true, Date{});
                        } else {
                            entry.on_alarm = v.str(*t, tp, "alarm", true, "");
                            if (entry.on_alarm != "currency" &&
                                entry.on_alarm != "merchant")
                                v.err(tp + "/alarm",
                                      "expected 'currency' or 'merchant'");
                            entry.delay_days =
                                int(v.integer(*t, tp, "delay_days", false, 0));
                            if (entry.delay_days < 0)
                                v.err(tp + "/delay_days", "must be >= 0");
                        }
                    }
                } else {
                    v.err(p + "/trigger", "missing required object");
                }
                if (const json* m = v.get(e, "members")) {
                    if (!m->is_array())
                        v.err(p + "/members", "expected an array of member segments");
                    else
                        for (std::size_t mi = 0; mi < m->size(); ++mi) {
                            const std::string mp =
                                p + "/members/" + std::to_string(mi);
                            if (!(*m)[mi].is_string()) {
                                v.err(mp, "expected a string");
                                continue;
                            }
                            const std::string name = (*m)[mi].get<std::string>();
                            const int g = sc.segment_index(name);
                            if (g < 0 || std::size_t(g) >= sc.members.size())
                                v.err(mp, "'" + name + "' is not a member segment");
                            else
                                entry.member_segments.push_back(g);
                        }
                }
                sc.c3_script.push_back(entry);
            }
    }

    // --- detection -------------------------------------------------------------
    auto parse_detector = [&](const json& j, const std::string& p, DetectorCfg& d) {
        v.known_keys(j, p, {"window", "k", "seasonal", "domain", "system_k",
                            "p_hat_floor"});
        try {
            d.window = window_from_string(v.str(j, p, "window", false, "monthly"));
        } catch (const std::exception& e) {
            v.err(p + "/window", e.what());
        }
        d.k = v.number(j, p, "k", false, d.k);
        if (d.k <= 0)
            v.err(p + "/k", "must be > 0");
        d.seasonal = v.boolean(j, p, "seasonal", false, d.seasonal);
        try {
            d.domain = domain_from_string(
                v.str(j, p, "domain", false, to_string(d.domain)));
        } catch (const std::exception& e) {
            v.err(p + "/domain", e.what());
        }
    };
    if (const json* det = v.get(root, "detection")) {
        const std::string p = "/detection";
        if (v.obj(*det, p)) {
            v.known_keys(*det, p, {"enabled", "currency", "merchants"});
            sc.detection.enabled = v.boolean(*det, p, "enabled", false, true);
            if (const json* c = v.get(*det, "currency"))
                if (v.obj(*c, p + "/currency"))
                    parse_detector(*c, p + "/currency", sc.detection.currency);
            if (const json* m = v.get(*det, "merchants"))
                if (v.obj(*m, p + "/merchants")) {
                    parse_detector(*m, p + "/merchants", sc.detection.merchants.base);
                    sc.detection.merchants.system_k = v.number(
                        *m, p + "/merchants", "system_k", false,
                        sc.detection.merchants.system_k);
                    if (sc.detection.merchants.system_k <= 0)
                        v.err(p + "/merchants/system_k", "must be > 0");
                    sc.detection.merchants.p_hat_floor = v.number(
                        *m, p + "/merchants", "p_hat_floor", false,
                        sc.detection.merchants.p_hat_floor);
                    v.range(sc.detection.merchants.p_hat_floor, 1e-9, 0.5,
                            p + "/merchants/p_hat_floor", "p_hat_floor");
                }
        }
    }

    out.errors = std::move(v.errors);
    if (out.errors.empty())
        out.scenario = std::move(sc);
    return out;
}

LoadResult load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        LoadResult out;
        out.errors.push_back({"(file)", "cannot open '" + path + "'"});
        return out;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario_json(buf.str());
}

std::string format_errors(const std::vector<ValidationError>& errors) {
    std::ostringstream os;
    for (const auto& e : errors)
        os << (e.path.empty() ? "/" : e.path) << ": " << e.message << '\n';
    return os.str();
}

} // namespace ecsim
