#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hjm/report.hpp"
#include "hjm/scenario.hpp"

namespace {

enum Exit { ok = 0, check_failure = 1, config_error = 2, runtime_error = 3 };

void apply_worker_env() {
    if (const char* env = std::getenv("HJM_NUM_WORKERS")) {
        const int n = std::atoi(env);
        if (n < 1) throw hjm::ConfigError("HJM_NUM_WORKERS must be a positive integer");
        omp_set_num_threads(n);
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hjm::ConfigError("cannot read config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_checks(const hjm::RunResult& r) {
    for (const auto& c : r.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  lhs=" << c.lhs << " rhs=" << c.rhs
                  << " se=" << c.standard_error << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
}

int run_one(hjm::Scenario sc, hjm::RunMode mode, const std::string& out_dir, const std::string& command) {
    const hjm::RunResult r = hjm::run_scenario(sc, mode);
    hjm::emit_report(sc, r, out_dir, command);
    std::cout << "wrote " << out_dir << " (" << r.ensemble.n_paths << " paths, " << r.summary.size()
              << " time nodes";
    if (!r.residuals.empty()) std::cout << ", " << r.residuals.size() << " picard sweeps";
    std::cout << ")\n";
    print_checks(r);
    if (mode == hjm::RunMode::verify) {
        std::size_t failed = 0;
        for (const auto& c : r.checks) failed += c.pass ? 0 : 1;
        std::cout << (failed == 0 ? "all " + std::to_string(r.checks.size()) + " checks passed"
                                  : std::to_string(failed) + " of " + std::to_string(r.checks.size()) + " checks failed")
                  << "\n";
        if (failed) return check_failure;
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levy-driven HJM forward-curve simulator and verification suite"};
    app.require_subcommand(1);

    std::string config, out;
    std::uint64_t seed = 0;
    bool have_seed = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "scenario file (YAML)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "root seed, overriding the config")->each([&](const std::string&) {
            have_seed = true;
        });
        sub->add_option("--out", out, "output directory, overriding the config");
    };
    CLI::App* simulate = app.add_subcommand("simulate", "solve and write curves and summary");
    CLI::App* verify = app.add_subcommand("verify", "solve and run the configured checks");
    CLI::App* sweep = app.add_subcommand("sweep", "rerun verify over a list of values of one config key");
    add_common(simulate);
    add_common(verify);
    add_common(sweep);
    std::string param, values;
    sweep->add_option("--param", param, "dotted config key, e.g. solver.T")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        apply_worker_env();
        const std::string text = read_text(config);
        auto finalize = [&](hjm::Scenario sc) {
            if (have_seed) sc.solver.seed = seed;
            return sc;
        };
        if (simulate->parsed() || verify->parsed()) {
            hjm::Scenario sc = finalize(hjm::parse_scenario(text, config));
            const std::string dir = out.empty() ? sc.out_dir : out;
            return run_one(sc, simulate->parsed() ? hjm::RunMode::simulate : hjm::RunMode::verify, dir,
                           simulate->parsed() ? "simulate" : "verify");
        }
        std::vector<std::string> list;
        std::stringstream ss(values);
        for (std::string v; std::getline(ss, v, ',');)
            if (!v.empty()) list.push_back(v);
        if (list.empty()) throw hjm::ConfigError("sweep: --values is empty");
        // validate every point before running any
        std::vector<hjm::Scenario> points;
        for (const auto& v : list) points.push_back(finalize(hjm::parse_scenario_with_override(text, config, param, v)));
        int status = ok;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const std::string base = out.empty() ? points[i].out_dir : out;
            const std::string dir = base + "/" + param + "=" + list[i];
            const int s = run_one(points[i], hjm::RunMode::verify, dir, "sweep " + param + "=" + list[i]);
            if (s != ok) status = s;
        }
        return status;
    } catch (const hjm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return runtime_error;
    }
}
