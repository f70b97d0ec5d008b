#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hjm/report.hpp"
#include "hjm/scenario.hpp"

using namespace hjm;
namespace fs = std::filesystem;

namespace {
const std::string minimal = R"(grid: {x_max: 4, n_points: 65, beta: 0.1}
driver:
  components:
    - {kind: wiener, r: 1}
  r_ball: 1.0
volatility: {kind: zero}
initial_curve: {kind: flat, level: 0.03}
solver: {T: 1, n_steps: 16, n_paths: 2, method: picard}
seed: 5
verify:
  checks: []
output: {dir: out/test, curve_paths: 2}
)";

std::string with(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string config_error(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hjm_test_" + name);
    fs::remove_all(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HJM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST_CASE("parse a minimal scenario") {
    const Scenario sc = parse_scenario(minimal);
    CHECK(sc.n_points == 65);
    CHECK(sc.solver.n_steps == 16);
    CHECK(sc.solver.seed == 5);
    CHECK(sc.checks.empty());
    CHECK(sc.initial_curve() == Curve(65, 0.03));
    CHECK(sc.model().dimension() == 1);
}

TEST_CASE("strict parsing") {
    const std::string unknown = config_error(with(minimal, "beta: 0.1", "beta: 0.1, bta: 2"));
    CHECK(unknown.find("bta") != std::string::npos);
    CHECK(unknown.find("line 1") != std::string::npos);

    CHECK(config_error(with(minimal, "seed: 5", "seed: 5\ndrift: 1")).find("drift") != std::string::npos);
    CHECK(config_error(with(minimal, "volatility: {kind: zero}", "volatility: {kind: zero, drift_sign: 0}")) != "");
    CHECK(config_error(with(minimal, "checks: []", "checks: [{name: no_such_check}]")).find("no_such_check") !=
          std::string::npos);
    CHECK(config_error(with(minimal, "checks: []", "checks: [{name: lipschitz, params: {radius: [1]}}]")) != "");
    CHECK(config_error(with(minimal, "checks: []", "checks: [{name: hs_growth, tol: 0.1}]")) != "");
    CHECK(config_error(with(minimal, "n_paths: 2", "n_paths: 0")) != "");
    CHECK(config_error(with(minimal, "x_max: 4", "x_max: -4")) != "");
}

TEST_CASE("cross-references are validated") {
    const std::string late =
        with(minimal, "checks: []", "checks: [{name: martingale_bonds, params: {maturities: [2, 5]}}]");
    const std::string msg = config_error(late);
    CHECK(msg.find("maturity") != std::string::npos);
    CHECK(msg.find("x_max") != std::string::npos);

    const std::string dims = with(minimal, "volatility: {kind: zero}",
                                  "volatility: {kind: constant_vector, value: [0.01, 0.01]}");
    CHECK(config_error(dims) != "");
    CHECK(config_error(with(minimal, "T: 1,", "T: 1, p: 6,")) != "");
}

TEST_CASE("dotted overrides") {
    const Scenario sc = parse_scenario_with_override(minimal, "<string>", "solver.T", "0.5");
    CHECK(sc.solver.T == 0.5);
    CHECK_THROWS_AS(parse_scenario_with_override(minimal, "<string>", "solver.nope", "1"), ConfigError);
}

TEST_CASE("report schemas") {
    const Scenario sc = parse_scenario(minimal);
    const RunResult r = run_scenario(sc, RunMode::verify);
    const std::string checks = checks_csv(r.checks);
    CHECK(checks == "name,kind,lhs,rhs,ratio,n_samples,standard_error,tol,pass,detail\n");
    const std::string summary = summary_csv(r.summary);
    CHECK(summary.rfind("t,H2_script,H2_bb,se,n_alive\n", 0) == 0);
    CHECK(r.summary.size() == sc.solver.n_times());
    CHECK(std::count(summary.begin(), summary.end(), '\n') == static_cast<long>(sc.solver.n_times() + 1));
    const std::string curves = curves_csv(r.ensemble, sc.grid(), sc.curve_paths);
    CHECK(curves.rfind("path_id,t,x,u\n", 0) == 0);
    CHECK(curves.back() == '\n');
    CHECK(std::count(curves.begin(), curves.end(), '\n') == static_cast<long>(1 + 2 * 17 * 65));
}

TEST_CASE("git blob hash") {
    // git hash-object of an empty file and of "hello\n"
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("reports are byte-identical across runs") {
    const Scenario sc = load_scenario(std::string(HJM_SCENARIO_DIR) + "/minimal_transport.cfg");
    const fs::path a = fresh_dir("repro_a"), b = fresh_dir("repro_b");
    emit_report(sc, run_scenario(sc, RunMode::verify), a, "verify");
    emit_report(sc, run_scenario(sc, RunMode::verify), b, "verify");
    for (const char* f : {"curves.csv", "summary.csv", "checks.csv", "manifest.json"}) {
        CAPTURE(f);
        CHECK(slurp(a / f) == slurp(b / f));
        CHECK(!slurp(a / f).empty());
    }
    CHECK(slurp(a / "manifest.json").find(git_blob_sha1(slurp(a / "curves.csv"))) != std::string::npos);
}

TEST_CASE("minimal scenario writes the transported curve") {
    const Scenario sc = load_scenario(std::string(HJM_SCENARIO_DIR) + "/minimal_transport.cfg");
    const RunResult r = run_scenario(sc, RunMode::simulate);
    const Curve u0 = sc.initial_curve();
    for (std::size_t j = 0; j < sc.solver.n_times(); ++j)
        CHECK(r.ensemble.curve_copy(0, j) == shift(u0, sc.solver.time(j), sc.grid()));
    CHECK(r.checks.empty());
}

TEST_CASE("command line exit codes") {
    const std::string dir = std::string(HJM_SCENARIO_DIR);
    const fs::path out = fresh_dir("cli");
    CHECK(run_cli("simulate --config " + dir + "/minimal_transport.cfg --out " + (out / "sim").string()) == 0);
    CHECK(fs::exists(out / "sim" / "curves.csv"));
    CHECK(run_cli("verify --config " + dir + "/minimal_transport.cfg --out " + (out / "ver").string()) == 0);
    CHECK(run_cli("verify --config " + dir + "/minimal_transport.cfg --seed 7 --out " + (out / "seed").string()) == 0);
    CHECK(slurp(out / "seed" / "manifest.json").find("\"seed\": 7") != std::string::npos);
    CHECK(run_cli("sweep --config " + dir + "/minimal_transport.cfg --param solver.T --values 0.5,1 --out " +
                  (out / "sw").string()) == 0);
    CHECK(fs::exists(out / "sw" / "solver.T=0.5" / "checks.csv"));

    std::ofstream(out / "bad.cfg") << with(slurp(dir + "/minimal_transport.cfg"), "{name: zero_transport}",
                                           "{name: martingale_bonds, params: {maturities: [9]}}");
    CHECK(run_cli("verify --config " + (out / "bad.cfg").string() + " --out " + (out / "bad").string()) == 2);
    CHECK(run_cli("verify --config " + dir + "/minimal_transport.cfg --out /proc/forbidden") == 3);
}
