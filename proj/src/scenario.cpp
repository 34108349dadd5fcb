#include "ecsim/scenario.hpp"

#include <stdexcept>

namespace ecsim {

std::vector<Money> attack_daily_plan(const AttackCfg& a) {
    if (!a.enabled)
        return {};
    if (a.n_days < 3)
        throw std::invalid_argument("attack n_days must be >= 3");
    std::vector<Money> plan(std::size_t(a.n_days), a.full_amount);
    plan[0] = a.test_amount;
    if (a.stand_down_day >= 1 && a.stand_down_day <= a.n_days)
        plan[std::size_t(a.stand_down_day - 1)] = 0;
    return plan;
}

int window_days(DetectWindow w) {
    return int(w);
}

const char* to_string(DetectWindow w) {
    switch (w) {
    case DetectWindow::daily: return "daily";
    case DetectWindow::weekly: return "weekly";
    case DetectWindow::monthly: return "monthly";
    }
    throw std::logic_error("unknown DetectWindow");
}

DetectWindow window_from_string(const std::string& s) {
    if (s == "daily") return DetectWindow::daily;
    if (s == "weekly") return DetectWindow::weekly;
    if (s == "monthly") return DetectWindow::monthly;
    throw std::invalid_argument("unknown detection window '" + s + "'");
}

const char* to_string(DetectDomain d) {
    switch (d) {
    case DetectDomain::linear: return "linear";
    case DetectDomain::log: return "log";
    }
    throw std::logic_error("unknown DetectDomain");
}

DetectDomain domain_from_string(const std::string& s) {
    if (s == "linear") return DetectDomain::linear;
    if (s == "log") return DetectDomain::log;
    throw std::invalid_argument("unknown detection domain '" + s + "'");
}

int Scenario::segment_count() const {
    return int(members.size() + consumers.size() + merchants.size());
}

std::string Scenario::segment_name(int g) const {
    if (g < 0)
        throw std::out_of_range("segment index");
    std::size_t i = std::size_t(g);
    if (i < members.size())
        return members[i].name;
    i -= members.size();
    if (i < consumers.size())
        return consumers[i].name;
    i -= consumers.size();
    if (i < merchants.size())
        return merchants[i].name;
    throw std::out_of_range("segment index");
}

int Scenario::segment_index(const std::string& name) const {
    int g = 0;
    for (const auto& s : members) {
        if (s.name == name)
            return g;
        ++g;
    }
    for (const auto& s : consumers) {
        if (s.name == name)
            return g;
        ++g;
    }
    for (const auto& s : merchants) {
        if (s.name == name)
            return g;
        ++g;
    }
    return -1;
}

ClassMatrix Scenario::build_matrix() const {
    ClassMatrix m;
    for (const auto& [payer, payee, type] : matrix_entries)
        m.allow(payer, payee, type);
    return m;
}

int Scenario::class_index(const std::string& name) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == name)
            return int(i);
    return -1;
}

} // namespace ecsim
