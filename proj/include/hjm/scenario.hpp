#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjm/hjm_model.hpp"
#include "hjm/levy_driver.hpp"
#include "hjm/mild_solver.hpp"
#include "hjm/verifiers.hpp"
#include "hjm/weighted_space.hpp"

namespace hjm {

/// Malformed or inconsistent scenario; the message names the key and, when
/// known, the line.
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct CheckSpec {
    std::string name;
    std::optional<double> tol;
    std::map<std::string, std::vector<double>> params;  // scalars are one-element lists

    double get(const std::string& key, double fallback) const;
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;
};

struct Scenario {
    std::string source;  // config text as read, echoed into the manifest
    std::string origin;  // file path or "<string>"

    double x_max = 8.0;
    std::size_t n_points = 129;
    double beta = 0.1;

    std::vector<LevyComponent> components;
    std::optional<GammaGeometricFamily> family;
    double r_ball = 1.0;
    double delta = 1.5;
    double p_max = 4.0;
    EvaluationMode mode = EvaluationMode::closed_form;

    std::string vol_kind;
    std::vector<double> vol_params;  // amplitude / value / slope / coefficient
    double vol_decay = 1.0;
    std::optional<double> vol_r_budget;
    int drift_sign = -1;

    std::vector<double> u0_values;

    SolverConfig solver;
    std::vector<CheckSpec> checks;
    std::string out_dir = "out";
    std::size_t curve_paths = 4;

    WeightGrid grid() const;
    LevyDriver driver() const;
    VolatilitySpec volatility() const;
    HjmModel model() const;
    Curve initial_curve() const { return Curve(u0_values); }
};

/// Strict parse: unknown keys, missing required keys and violated
/// cross-references all raise ConfigError.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::string& path);

/// Same as parse_scenario after setting the dotted key (e.g. "solver.T") to `value`.
Scenario parse_scenario_with_override(const std::string& text, const std::string& origin, const std::string& key,
                                      const std::string& value);

/// Names accepted in the verify section.
std::vector<std::string> known_checks();

/// Runs one configured check against the scenario.
std::vector<CheckReport> run_check(const Scenario& scenario, const CheckSpec& spec);

enum class RunMode { simulate, verify };

struct RunResult {
    SolutionEnsemble ensemble;
    std::vector<SummaryRow> summary;
    std::vector<CheckReport> checks;
    std::vector<double> residuals;
    bool all_pass() const;
};

RunResult run_scenario(const Scenario& scenario, RunMode mode);

}  // namespace hjm
