#pragma once

// Run configuration and self-contained verification reports.  A report
// records the measured quantities together with the comparison string that
// decided it, so the pass flag can be recomputed from the file alone.
// Serialization is deterministic: sorted keys, shortest round-trip floats.

#include "mcs/domain.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mcs::report {

struct RunConfig {
    std::string cone = "t";
    int dim = 3;
    double eta = 0.1;
    double delta = 0.0;  // 0 means "use the band half-width R1(eta)"
    double budget_rel_tol = 1e-9;
    int resolution = 16;
    std::uint64_t seed = 1;
    double tol_rel = 1e-4;   // relative tolerance for translation scans
    double area_tol = 1e-3;  // area slack for descent recovery
    int trials = 5;
    std::string out_dir = ".";

    // Throws invalid_input unless the cone name is known, eta sits inside
    // the certified convexity regime, delta fits in (0, R1(eta)], and every
    // tolerance and count is positive.
    void validate() const;

    double effective_delta() const;
    domain::ConvexDomain make_domain() const;

    // key = value lines, '#' comments; unknown keys are rejected.
    static RunConfig from_file(const std::string& path);
    void apply(const std::string& key, const std::string& value);
};

struct Report {
    std::string check;  // canonical check name, e.g. "measure-scan"
    std::string claim;  // one-line statement of what was verified
    std::map<std::string, double> params;
    std::map<std::string, double> quantities;
    double tolerance = 0.0;
    std::string comparison;  // "<lhs> <op> <rhs>", sides are quantity keys or literals
    bool pass = false;
    double runtime_s = 0.0;
};

// Re-evaluates the comparison on the recorded quantities.  Operators:
// <=, <, >=, >, ==abs (absolute difference within `tolerance`).
bool report_holds(const Report& r);

// Fills in pass from report_holds; convenience for check implementations.
Report sealed(Report r);

nlohmann::json to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);

void write_reports(const std::string& path, const std::vector<Report>& reports);
std::vector<Report> read_reports(const std::string& path);

// Plot-ready CSV: fixed column order, shortest round-trip floats.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace mcs::report
