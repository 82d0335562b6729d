#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "scc/experiments.hpp"

using namespace scc;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("scc_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("config parsing: fractions, lists, overrides") {
    const auto dir = temp_dir("cfg");
    const auto path = (dir / "a.cfg").string();
    {
        std::ofstream out(path);
        out << "# comment line\n"
            << "N = 10\n"
            << "lambda = 1\n"
            << "q = 4/3   # exact fraction\n"
            << "q_values = 4/3, 6, 60\n";
    }
    KeyValueConfig cfg = KeyValueConfig::from_file(path);
    CHECK(cfg.integer_or("N", 0) == 10);
    CHECK(cfg.number("q") == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    const auto qs = cfg.number_list("q_values");
    REQUIRE(qs.size() == 3);
    CHECK(qs[0] == doctest::Approx(4.0 / 3.0));
    CHECK(qs[2] == 60.0);

    cfg.apply_override("q=6");
    CHECK(cfg.number("q") == 6.0);
    CHECK_THROWS_AS(cfg.apply_override("no_equals_sign"), ConfigError);
    CHECK_THROWS_AS(cfg.number("missing"), ConfigError);
    CHECK_THROWS_AS((void)KeyValueConfig::parse_number("abc", "k"), ConfigError);
    CHECK_THROWS_AS((void)KeyValueConfig::parse_number("1/0", "k"), ConfigError);
}

TEST_CASE("experiments reject bad configs with ConfigError") {
    KeyValueConfig cfg;
    CHECK_THROWS_AS(run_experiment("spectrum", cfg), ConfigError);  // missing N
    cfg.set("N", "8");
    cfg.set("lambda", "1");
    cfg.set("q", "2");
    CHECK_THROWS_AS(run_experiment("unknown-sweep", cfg), ConfigError);
    cfg.set("format", "xml");
    CHECK_THROWS_AS(run_experiment("spectrum", cfg), ConfigError);
}

TEST_CASE("spectrum experiment writes a deterministic csv") {
    const auto dir1 = temp_dir("spec1");
    const auto dir2 = temp_dir("spec2");
    KeyValueConfig cfg;
    cfg.set("N", "8");
    cfg.set("lambda", "1");
    cfg.set("q", "4/3");
    cfg.set("output_dir", dir1.string());
    const ExperimentResult r1 = run_experiment("spectrum", cfg);
    cfg.set("output_dir", dir2.string());
    const ExperimentResult r2 = run_experiment("spectrum", cfg);

    CHECK(r1.table.rows.size() == 5);
    const std::string a = slurp(r1.output_path);
    std::string b = slurp(r2.output_path);
    CHECK(a == b);  // byte-identical reruns
    CHECK(a.find("# N=8") != std::string::npos);
    CHECK(a.find("state,energy,r0,r1") != std::string::npos);
}

TEST_CASE("seed sweep covers every coupling in the list") {
    const auto dir = temp_dir("seed");
    KeyValueConfig cfg;
    cfg.set("N", "8");
    cfg.set("lambda", "1");
    cfg.set("q", "4/3");
    cfg.set("q_values", "4/3,6");
    cfg.set("t_min", "0");
    cfg.set("t_max", "0.02");
    cfg.set("steps", "11");
    cfg.set("output_dir", dir.string());
    const ExperimentResult res = run_experiment("seed-sweep", cfg);
    CHECK(res.table.rows.size() == 22);
    // eta1 starts at zero for each coupling.
    CHECK(std::get<double>(res.table.rows[0][2]) == doctest::Approx(0.0));
    CHECK(std::get<double>(res.table.rows[11][2]) == doctest::Approx(0.0));
}

TEST_CASE("phase sweep emits guard-band flags with empty cells") {
    const auto dir = temp_dir("phase");
    KeyValueConfig cfg;
    cfg.set("N", "10");
    cfg.set("lambda", "1");
    cfg.set("q", "4/3");
    cfg.set("sequence", "quasifree");
    cfg.set("q_prime", "200");
    cfg.set("t", "0.01");
    cfg.set("steps", "41");
    cfg.set("output_dir", dir.string());
    cfg.set("format", "json");
    const ExperimentResult res = run_experiment("phase-sweep", cfg);

    const nlohmann::json doc = nlohmann::json::parse(slurp(res.output_path));
    REQUIRE(doc.contains("config"));
    REQUIRE(doc.contains("rows"));
    REQUIRE(doc["rows"].size() == 41);

    // Grid point 20 sits exactly at pi: flagged, sensitivity cells null.
    const auto& guard_row = doc["rows"][20];
    CHECK(guard_row["flags"].get<std::string>().find("guard_band") != std::string::npos);
    CHECK(guard_row["delta_phi_sq"].is_null());
    CHECK(guard_row["fisher"].is_null());
    CHECK_FALSE(guard_row["proxy_delta_phi_sq"].is_null());

    // Away from the bands the cells are populated.
    const auto& mid_row = doc["rows"][7];
    CHECK(mid_row["flags"].get<std::string>().empty());
    CHECK(mid_row["delta_phi_sq"].is_number());
    CHECK(mid_row["fisher"].is_number());

    // Full resolved settings are embedded.
    CHECK(doc["config"]["q_prime"].get<std::string>() == "200");
    CHECK(doc["config"]["experiment"].get<std::string>() == "phase-sweep");
}

TEST_CASE("dwell sweep reports the fitted fringe in its summary") {
    const auto dir = temp_dir("dwell");
    KeyValueConfig cfg;
    cfg.set("N", "10");
    cfg.set("lambda", "1");
    cfg.set("q", "4/3");
    cfg.set("sequence", "free");
    cfg.set("omega", "500");
    cfg.set("t", "0.01");
    cfg.set("u_max", "0.02");
    cfg.set("steps", "41");
    cfg.set("output_dir", dir.string());
    const ExperimentResult res = run_experiment("dwell-sweep", cfg);
    double omega_fringe = 0.0;
    for (const auto& [k, v] : res.summary)
        if (k == "omega_fringe") omega_fringe = std::stod(v);
    CHECK(omega_fringe == doctest::Approx(1000.0).epsilon(1e-3));
}

TEST_CASE("validation suite passes on a healthy model and catches corruption") {
    KeyValueConfig cfg;
    cfg.set("N", "12");
    cfg.set("lambda", "1");
    cfg.set("q", "2");
    const ValidationReport good = validate_model(cfg);
    CHECK(good.all_pass());
    CHECK(good.checks.size() >= 14);

    const ValidationReport bad = validate_model(cfg, 2);
    CHECK_FALSE(bad.all_pass());
    bool residual_failed = false;
    for (const auto& c : bad.checks)
        if (c.name == "richardson_residual_max" && !c.pass) residual_failed = true;
    CHECK(residual_failed);
}

TEST_CASE("validation suite covers the quasifree working point") {
    KeyValueConfig cfg;
    cfg.set("N", "16");
    cfg.set("lambda", "1");
    cfg.set("q", "4/3");
    cfg.set("sequence", "quasifree");
    cfg.set("q_prime", "300");
    cfg.set("t", "0.01");
    const ValidationReport report = validate_model(cfg);
    CHECK(report.all_pass());
}
