#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "stratlab/format.hpp"
#include "stratlab/lab.hpp"

namespace stratlab {

/**
 * CSV layout:
 *   member,lhs,rhs,ratio          header
 *   <id>,<lhs>,<rhs>,<ratio>      one row per member, sorted by id
 *   summary,,,<constant>          footer; constant = max ratio
 * Numbers carry 17 significant digits with a '.' decimal point.
 */
inline std::string report_csv(const ExperimentReport& r) {
    std::vector<const ReportRow*> rows;
    for (const auto& row : r.rows) rows.push_back(&row);
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow* a, const ReportRow* b) { return a->member < b->member; });
    std::string out = "member,lhs,rhs,ratio\n";
    for (const ReportRow* rp : rows) {
        const ReportRow& row = *rp;
        out += row.member + "," + format_double(row.lhs) + "," + format_double(row.rhs) + "," +
               format_double(row.ratio) + "\n";
    }
    out += "summary,,," + format_double(r.constant) + "\n";
    return out;
}

/// Summary record; keys always appear in this order.
inline nlohmann::ordered_json report_summary(const ExperimentReport& r) {
    nlohmann::ordered_json j;
    j["experiment"] = r.id;
    j["kind"] = r.kind;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    j["parameters"] = params;
    j["members"] = r.rows.size();
    j["constant"] = r.constant;
    j["slope"] = r.slope ? nlohmann::ordered_json(*r.slope) : nlohmann::ordered_json();
    j["slope_halfwidth"] = r.halfwidth ? nlohmann::ordered_json(*r.halfwidth) : nlohmann::ordered_json();
    j["verdict"] = r.pass() ? "PASS" : "FAIL";
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
        nlohmann::ordered_json cj;
        cj["name"] = c.name;
        cj["value"] = c.value;
        cj["relation"] = c.relation;
        cj["bound"] = c.bound;
        cj["pass"] = c.pass;
        checks.push_back(cj);
    }
    j["checks"] = checks;
    j["warnings"] = r.warnings;
    j["runtime_seconds"] = r.runtime_seconds;
    return j;
}

struct ReportFiles {
    std::filesystem::path csv;
    std::filesystem::path summary;
};

/// Writes <dir>/<id>.csv and <dir>/<id>.summary.json.
inline ReportFiles emit_report(const ExperimentReport& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw std::runtime_error("output directory '" + dir.string() + "' is not writable");
    const std::string stem = r.id.empty() ? r.kind : r.id;
    ReportFiles files{dir / (stem + ".csv"), dir / (stem + ".summary.json")};
    {
        std::ofstream out(files.csv, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + files.csv.string());
        out << report_csv(r);
    }
    {
        std::ofstream out(files.summary, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + files.summary.string());
        out << report_summary(r).dump(2) << "\n";
    }
    return files;
}

}  // namespace stratlab
