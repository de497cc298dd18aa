// Verification bookkeeping: named pass/fail entries with measured values.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace soliton {

enum class CheckStatus { Pass, Fail, ReportOnly };

std::string to_string(CheckStatus s);

// One verified property.  measured is the witnessing scalar (residual, margin,
// limit, ...); tolerance is the asserted bound, NaN when the entry is
// informational.  anchor names the underlying geometric fact being checked.
struct ReportEntry {
    std::string name;
    CheckStatus status = CheckStatus::ReportOnly;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string anchor;
};

struct VerificationReport {
    std::vector<ReportEntry> entries;

    void add(ReportEntry e) { entries.push_back(std::move(e)); }
    void add(std::vector<ReportEntry> es) {
        for (auto& e : es) entries.push_back(std::move(e));
    }
    bool all_pass() const;
    const ReportEntry* find(const std::string& name) const;
};

ReportEntry make_entry(std::string name, bool pass, double measured, double tolerance,
                       std::string anchor);
ReportEntry make_report_only(std::string name, double measured, std::string anchor);

nlohmann::ordered_json to_json(const ReportEntry& e);
nlohmann::ordered_json to_json(const VerificationReport& r);

}  // namespace soliton
