#include "soliton/report.hpp"

#include <cmath>

namespace soliton {

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        default: return "report-only";
    }
}

bool VerificationReport::all_pass() const {
    for (const auto& e : entries)
        if (e.status == CheckStatus::Fail) return false;
    return true;
}

const ReportEntry* VerificationReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

ReportEntry make_entry(std::string name, bool pass, double measured, double tolerance,
                       std::string anchor) {
    return {std::move(name), pass ? CheckStatus::Pass : CheckStatus::Fail, measured, tolerance,
            std::move(anchor)};
}

ReportEntry make_report_only(std::string name, double measured, std::string anchor) {
    return {std::move(name), CheckStatus::ReportOnly, measured,
            std::numeric_limits<double>::quiet_NaN(), std::move(anchor)};
}

nlohmann::ordered_json to_json(const ReportEntry& e) {
    nlohmann::ordered_json j;
    j["name"] = e.name;
    j["status"] = to_string(e.status);
    j["measured"] = e.measured;
    if (std::isnan(e.tolerance))
        j["tolerance"] = nullptr;
    else
        j["tolerance"] = e.tolerance;
    j["anchor"] = e.anchor;
    return j;
}

nlohmann::ordered_json to_json(const VerificationReport& r) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : r.entries) arr.push_back(to_json(e));
    return arr;
}

}  // namespace soliton
