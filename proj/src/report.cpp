#include "mcs/report.hpp"

#include "mcs/cones.hpp"

#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mcs::report {

void RunConfig::validate() const {
    if (cone != "plane" && cone != "y" && cone != "t")
        throw invalid_input("config: cone must be plane, y or t (got '" + cone + "')");
    if (dim < 3) throw invalid_input("config: ambient dimension must be at least 3");
    if (!(eta > 0.0)) throw invalid_input("config: eta must be positive");
    const auto spec = cones::build_named(cone, dim);
    const auto reg = domain::eta1_estimate(spec);
    if (eta >= reg.eta1) {
        std::ostringstream msg;
        msg << "config: eta " << eta << " is outside the certified convexity regime for the "
            << cone << " cone (needs eta < " << reg.eta1 << ")";
        throw invalid_input(msg.str());
    }
    const double r1 = std::sqrt(1.0 - sq(1.0 - eta));
    if (delta < 0.0 || delta > r1 + 1e-12)
        throw invalid_input("config: delta must lie in (0, R1(eta)] or 0 for the default");
    if (!(budget_rel_tol > 0.0) || !(tol_rel > 0.0) || !(area_tol > 0.0))
        throw invalid_input("config: tolerances must be positive");
    if (resolution < 4) throw invalid_input("config: resolution must be at least 4");
    if (trials < 1) throw invalid_input("config: trials must be positive");
}

double RunConfig::effective_delta() const {
    return delta > 0.0 ? delta : std::sqrt(1.0 - sq(1.0 - eta));
}

domain::ConvexDomain RunConfig::make_domain() const {
    return domain::ConvexDomain(cones::build_named(cone, dim), eta);
}

void RunConfig::apply(const std::string& key, const std::string& value) {
    try {
        if (key == "cone") cone = value;
        else if (key == "dim") dim = std::stoi(value);
        else if (key == "eta") eta = std::stod(value);
        else if (key == "delta") delta = std::stod(value);
        else if (key == "budget_rel_tol") budget_rel_tol = std::stod(value);
        else if (key == "resolution") resolution = std::stoi(value);
        else if (key == "seed") seed = std::stoull(value);
        else if (key == "tol_rel") tol_rel = std::stod(value);
        else if (key == "area_tol") area_tol = std::stod(value);
        else if (key == "trials") trials = std::stoi(value);
        else if (key == "out_dir") out_dir = value;
        else throw invalid_input("config: unknown key '" + key + "'");
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const invalid_input*>(&e)) throw;
        throw invalid_input("config: bad value '" + value + "' for key '" + key + "'");
    }
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("config: cannot open '" + path + "'");
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw invalid_input("config: line " + std::to_string(lineno) +
                                    " is not 'key = value'");
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

namespace {

double resolve(const Report& r, const std::string& token) {
    const auto it = r.quantities.find(token);
    if (it != r.quantities.end()) return it->second;
    try {
        size_t used = 0;
        const double v = std::stod(token, &used);
        if (used == token.size()) return v;
    } catch (const std::logic_error&) {
    }
    throw invalid_input("report: comparison token '" + token +
                        "' is neither a quantity nor a number");
}

}  // namespace

bool report_holds(const Report& r) {
    std::istringstream in(r.comparison);
    std::string lhs, op, rhs;
    if (!(in >> lhs >> op >> rhs))
        throw invalid_input("report: comparison must read '<lhs> <op> <rhs>'");
    std::string extra;
    if (in >> extra) throw invalid_input("report: trailing comparison tokens");
    const double a = resolve(r, lhs), b = resolve(r, rhs);
    if (op == "<=") return a <= b;
    if (op == "<") return a < b;
    if (op == ">=") return a >= b;
    if (op == ">") return a > b;
    if (op == "==abs") return std::abs(a - b) <= r.tolerance;
    throw invalid_input("report: unknown comparison operator '" + op + "'");
}

Report sealed(Report r) {
    r.pass = report_holds(r);
    return r;
}

nlohmann::json to_json(const Report& r) {
    nlohmann::json j;
    j["check"] = r.check;
    j["claim"] = r.claim;
    j["params"] = r.params;
    j["quantities"] = r.quantities;
    j["tolerance"] = r.tolerance;
    j["comparison"] = r.comparison;
    j["pass"] = r.pass;
    j["runtime_s"] = r.runtime_s;
    return j;
}

Report report_from_json(const nlohmann::json& j) {
    Report r;
    r.check = j.at("check").get<std::string>();
    r.claim = j.at("claim").get<std::string>();
    r.params = j.at("params").get<std::map<std::string, double>>();
    r.quantities = j.at("quantities").get<std::map<std::string, double>>();
    r.tolerance = j.at("tolerance").get<double>();
    r.comparison = j.at("comparison").get<std::string>();
    r.pass = j.at("pass").get<bool>();
    r.runtime_s = j.at("runtime_s").get<double>();
    return r;
}

void write_reports(const std::string& path, const std::vector<Report>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    std::ofstream out(path);
    if (!out) throw invalid_input("report: cannot write '" + path + "'");
    out << arr.dump(2) << "\n";
}

std::vector<Report> read_reports(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("report: cannot open '" + path + "'");
    nlohmann::json arr;
    in >> arr;
    std::vector<Report> out;
    for (const auto& j : arr) out.push_back(report_from_json(j));
    return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw invalid_input("report: cannot write '" + path + "'");
    for (size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    char buf[40];
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw invalid_input("report: csv row width differs from the header");
        for (size_t i = 0; i < row.size(); ++i) {
            // Shortest representation that round-trips the double exactly.
            const auto res = std::to_chars(buf, buf + sizeof buf, row[i]);
            out.write(buf, res.ptr - buf);
            out << (i + 1 < row.size() ? "," : "\n");
        }
    }
}

}  // namespace mcs::report
