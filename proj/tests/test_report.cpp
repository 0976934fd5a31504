#include "mcs/report.hpp"

#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace mcs;
using namespace mcs::report;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_path(const std::string& name) {
    return std::string("/tmp/mcs_report_test_") + name;
}

}  // namespace

TEST_CASE("run config validation accepts the default and rejects bad regimes") {
    RunConfig cfg;
    cfg.validate();
    CHECK(cfg.effective_delta() == doctest::Approx(std::sqrt(1.0 - 0.81)));

    RunConfig bad = cfg;
    bad.cone = "cube";
    CHECK_THROWS_AS(bad.validate(), invalid_input);

    // eta = 0.6 breaks the y regime (eta1 is just below 1/2 there).
    bad = cfg;
    bad.cone = "y";
    bad.eta = 0.6;
    CHECK_THROWS_AS(bad.validate(), invalid_input);

    // The t cone is the tightest: its certified regime ends near 0.21.
    bad = cfg;
    bad.eta = 0.3;
    CHECK_THROWS_AS(bad.validate(), invalid_input);

    bad = cfg;
    bad.delta = 0.9;  // above R1(0.1) ~ 0.436
    CHECK_THROWS_AS(bad.validate(), invalid_input);

    bad = cfg;
    bad.tol_rel = 0.0;
    CHECK_THROWS_AS(bad.validate(), invalid_input);

    bad = cfg;
    bad.trials = 0;
    CHECK_THROWS_AS(bad.validate(), invalid_input);

    bad = cfg;
    bad.dim = 2;
    CHECK_THROWS_AS(bad.validate(), invalid_input);
}

TEST_CASE("config files parse key = value lines with comments") {
    const std::string path = temp_path("cfg");
    {
        std::ofstream out(path);
        out << "# stability run\n";
        out << "cone = y\n";
        out << "eta = 0.07   # sideways margin\n";
        out << "seed = 42\n";
        out << "resolution=20\n";
        out << "\n";
    }
    const RunConfig cfg = RunConfig::from_file(path);
    CHECK(cfg.cone == "y");
    CHECK(cfg.eta == doctest::Approx(0.07));
    CHECK(cfg.seed == 42);
    CHECK(cfg.resolution == 20);
    CHECK(cfg.dim == 3);  // untouched default

    {
        std::ofstream out(path);
        out << "volume = 3\n";
    }
    CHECK_THROWS_AS(RunConfig::from_file(path), invalid_input);
    {
        std::ofstream out(path);
        out << "eta 0.1\n";
    }
    CHECK_THROWS_AS(RunConfig::from_file(path), invalid_input);
    {
        std::ofstream out(path);
        out << "eta = zero\n";
    }
    CHECK_THROWS_AS(RunConfig::from_file(path), invalid_input);
    CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/cfg"), invalid_input);
    std::remove(path.c_str());
}

TEST_CASE("flag overrides win over file values") {
    RunConfig cfg;
    cfg.apply("cone", "plane");
    cfg.apply("eta", "0.2");
    CHECK(cfg.cone == "plane");
    CHECK(cfg.eta == doctest::Approx(0.2));
    CHECK_THROWS_AS(cfg.apply("mystery", "1"), invalid_input);
    CHECK_THROWS_AS(cfg.apply("trials", "many"), invalid_input);
}

TEST_CASE("report pass flags are recomputable from the recorded quantities") {
    Report r;
    r.check = "measure-scan";
    r.claim = "translating the cone leaves the clipped area constant";
    r.quantities = {{"max_rel_variation", 2.5e-7}, {"tol_effective", 1e-4}};
    r.comparison = "max_rel_variation <= tol_effective";
    r = sealed(r);
    CHECK(r.pass);
    CHECK(report_holds(r));

    r.quantities["max_rel_variation"] = 3e-4;
    CHECK_FALSE(report_holds(r));

    // Literal right-hand sides and the remaining operators.
    r.comparison = "max_rel_variation <= 1e-3";
    CHECK(report_holds(r));
    r.comparison = "max_rel_variation > 1e-3";
    CHECK_FALSE(report_holds(r));
    r.comparison = "max_rel_variation >= 3e-4";
    CHECK(report_holds(r));
    r.quantities = {{"lhs", 1.0}, {"rhs", 1.0 + 5e-7}};
    r.tolerance = 1e-6;
    r.comparison = "lhs ==abs rhs";
    CHECK(report_holds(r));
    r.tolerance = 1e-8;
    CHECK_FALSE(report_holds(r));

    r.comparison = "missing <= 1";
    CHECK_THROWS_AS(report_holds(r), invalid_input);
    r.comparison = "lhs <=";
    CHECK_THROWS_AS(report_holds(r), invalid_input);
    r.comparison = "lhs ~ rhs";
    CHECK_THROWS_AS(report_holds(r), invalid_input);
    r.comparison = "lhs <= rhs extra";
    CHECK_THROWS_AS(report_holds(r), invalid_input);
}

TEST_CASE("report json round-trips and serializes deterministically") {
    Report r;
    r.check = "band-constant";
    r.claim = "projected band area is independent of the sign pattern";
    r.params = {{"alpha", kPi / 4}, {"theta", kPi / 2}, {"partitions", 100}};
    r.quantities = {{"spread_rel", 3.1e-9}, {"worst_dev_rel", 4.5e-8}};
    r.tolerance = 1e-6;
    r.comparison = "spread_rel <= 1e-6";
    r.pass = true;
    r.runtime_s = 0.25;

    const std::string path = temp_path("reports.json");
    write_reports(path, {r, r});
    const std::string first = slurp(path);
    write_reports(path, {r, r});
    CHECK(first == slurp(path));

    const auto back = read_reports(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].check == r.check);
    CHECK(back[0].claim == r.claim);
    CHECK(back[0].params.at("alpha") == r.params.at("alpha"));
    CHECK(back[0].quantities.at("spread_rel") == r.quantities.at("spread_rel"));
    CHECK(back[0].tolerance == r.tolerance);
    CHECK(back[0].comparison == r.comparison);
    CHECK(back[0].pass == r.pass);
    CHECK(back[0].runtime_s == r.runtime_s);
    CHECK(report_holds(back[0]) == back[0].pass);
    std::remove(path.c_str());
}

TEST_CASE("csv writer emits fixed columns with full precision") {
    const std::string path = temp_path("scan.csv");
    write_csv(path, {"t", "area"},
              {{-0.05, 2.5446900494077327}, {0.0, 2.5446900494077327}});
    const std::string body = slurp(path);
    CHECK(body == "t,area\n-0.05,2.5446900494077327\n0,2.5446900494077327\n");
    write_csv(path, {"t", "area"},
              {{-0.05, 2.5446900494077327}, {0.0, 2.5446900494077327}});
    CHECK(body == slurp(path));
    CHECK_THROWS_AS(write_csv(path, {"a"}, {{1.0, 2.0}}), invalid_input);
    std::remove(path.c_str());
}
