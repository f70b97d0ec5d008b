#include "hjm/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace hjm {

double CheckSpec::get(const std::string& key, double fallback) const {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (it->second.size() != 1) throw ConfigError("check " + name + ": parameter " + key + " must be a scalar");
    return it->second.front();
}

std::vector<double> CheckSpec::get_list(const std::string& key, std::vector<double> fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

bool RunResult::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckReport& r) { return r.pass; });
}

namespace {

std::string where(const YAML::Node& node) {
    const YAML::Mark m = node.Mark();
    return m.line >= 0 ? " (line " + std::to_string(m.line + 1) + ")" : "";
}

/// Mapping node whose keys must all be consumed before finish().
class Section {
   public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (!node_.IsMap()) throw ConfigError(path_ + ": expected a mapping" + where(node_));
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    YAML::Node raw(const std::string& key) {
        seen_.insert(key);
        YAML::Node n = node_[key];
        if (!n) throw ConfigError(path_ + "." + key + ": required key missing" + where(node_));
        return n;
    }

    template <class T>
    T get(const std::string& key) {
        YAML::Node n = raw(key);
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(path_ + "." + key + ": bad value" + where(n));
        }
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        return get<T>(key);
    }

    std::vector<double> list(const std::string& key) {
        YAML::Node n = raw(key);
        try {
            if (n.IsScalar()) return {n.as<double>()};
            return n.as<std::vector<double>>();
        } catch (const YAML::Exception&) {
            throw ConfigError(path_ + "." + key + ": expected a number or list of numbers" + where(n));
        }
    }

    Section sub(const std::string& key) { return Section(raw(key), path_ + "." + key); }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const std::string key = it->first.as<std::string>();
            if (!seen_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'" + where(it->first));
        }
    }

    const std::string& path() const { return path_; }

   private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

LevyComponent parse_component(Section s) {
    const auto kind = s.get<std::string>("kind");
    LevyComponent c;
    if (kind == "wiener") {
        c = LevyComponent::wiener(s.get<double>("r"));
    } else if (kind == "gamma") {
        c = LevyComponent::gamma(s.get<double>("c"), s.get<double>("alpha"));
    } else if (kind == "compound_poisson") {
        c = LevyComponent::compound_poisson(s.get<double>("lambda"), s.get<double>("jump_std"));
    } else {
        throw ConfigError(s.path() + ".kind: unknown component kind '" + kind + "'");
    }
    s.finish();
    return c;
}

Curve build_initial_curve(Section s, const WeightGrid& grid) {
    const auto kind = s.get<std::string>("kind");
    Curve u(grid.size(), 0.0);
    const auto x = grid.nodes();
    if (kind == "flat") {
        const double level = s.get<double>("level");
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = level;
    } else if (kind == "nelson_siegel") {
        const double b0 = s.get<double>("b0"), b1 = s.get<double>("b1"), b2 = s.get<double>("b2");
        const double tau = s.get<double>("tau");
        if (!(tau > 0.0)) throw ConfigError(s.path() + ".tau: must be positive");
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double e = std::exp(-x[i] / tau);
            u[i] = b0 + b1 * e + b2 * (x[i] / tau) * e;
        }
    } else if (kind == "values") {
        const auto v = s.list("values");
        if (v.size() != grid.size())
            throw ConfigError(s.path() + ".values: length " + std::to_string(v.size()) + " does not match grid n_points " +
                              std::to_string(grid.size()));
        u = Curve(v);
    } else {
        throw ConfigError(s.path() + ".kind: unknown initial curve '" + kind + "'");
    }
    s.finish();
    return u;
}

const std::map<std::string, std::set<std::string>>& check_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"cumulant_derivatives", {"n_points", "seed"}},
        {"cumulant_laplace", {"n_zeta", "n_draws", "seed"}},
        {"isometry", {"n_paths", "n_steps", "T", "seed"}},
        {"isometry_control", {"n_paths", "n_steps", "T", "seed"}},
        {"bichteler_jacod", {"n_paths", "dt", "horizons", "p", "seed", "driver_sweep"}},
        {"convolution_inequality", {"n_paths", "dt", "horizons", "p", "seed", "driver_sweep"}},
        {"martingale_bonds", {"maturities", "n_paths", "n_steps", "T", "seed"}},
        {"martingale_bonds_control", {"maturities", "n_paths", "n_steps", "T", "seed"}},
        {"hypotheses", {"sample_budget", "seed"}},
        {"hs_growth", {"n_curves", "seed"}},
        {"lipschitz", {"radii", "n_pairs", "factor", "seed"}},
        {"modulus_norm", {"n_curves", "seed"}},
        {"embeddings", {"n_curves", "n_points", "rel_change", "seed"}},
        {"gaussian_reduction", {"n_specs", "seed"}},
        {"zero_transport", {}},
        {"additive_gaussian", {"sigma0", "x_max", "n_points", "T", "steps", "n_paths", "seed"}},
        {"picard_contraction", {}},
        {"scheme_agreement", {"levels", "n_paths"}},
        {"initial_datum_lipschitz", {"n_dirs", "n_paths", "seed"}},
    };
    return keys;
}

const std::set<std::string>& checks_with_tol() {
    static const std::set<std::string> s = {"cumulant_derivatives", "isometry", "gaussian_reduction"};
    return s;
}

CheckSpec parse_check(Section s) {
    CheckSpec spec;
    spec.name = s.get<std::string>("name");
    const auto& keys = check_keys();
    auto allowed = keys.find(spec.name);
    if (allowed == keys.end()) throw ConfigError(s.path() + ".name: unknown check '" + spec.name + "'");
    if (s.has("tol")) {
        if (!checks_with_tol().count(spec.name))
            throw ConfigError(s.path() + ".tol: check '" + spec.name + "' takes no tolerance");
        spec.tol = s.get<double>("tol");
    }
    if (s.has("params")) {
        Section p = s.sub("params");
        for (const auto& key : allowed->second)
            if (p.has(key)) spec.params[key] = p.list(key);
        p.finish();
    }
    s.finish();
    return spec;
}

Scenario parse_node(const YAML::Node& root, const std::string& text, const std::string& origin) {
    Scenario sc;
    sc.source = text;
    sc.origin = origin;
    Section top(root, "config");

    {
        Section g = top.sub("grid");
        sc.x_max = g.get<double>("x_max");
        sc.n_points = g.get<std::size_t>("n_points");
        sc.beta = g.get<double>("beta", 0.1);
        g.finish();
    }
    WeightGrid grid = [&] {
        try {
            return sc.grid();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
    }();

    {
        Section d = top.sub("driver");
        if (d.has("components") && d.has("family")) throw ConfigError("driver: give either components or family");
        if (d.has("family")) {
            Section f = d.sub("family");
            const auto rule = f.get<std::string>("rule");
            if (rule != "gamma_geometric") throw ConfigError("driver.family.rule: unknown rule '" + rule + "'");
            GammaGeometricFamily fam;
            fam.c0 = f.get<double>("c0");
            fam.ratio = f.get<double>("ratio");
            fam.alpha = f.get<double>("alpha");
            fam.d_trunc = f.get<std::size_t>("d_trunc");
            f.finish();
            sc.family = fam;
        } else {
            YAML::Node comps = d.raw("components");
            if (!comps.IsSequence() || comps.size() == 0)
                throw ConfigError("driver.components: expected a non-empty list" + where(comps));
            for (std::size_t k = 0; k < comps.size(); ++k)
                sc.components.push_back(parse_component(Section(comps[k], "driver.components[" + std::to_string(k) + "]")));
        }
        sc.r_ball = d.get<double>("r_ball");
        sc.delta = d.get<double>("delta", 1.5);
        sc.p_max = d.get<double>("p_max", 4.0);
        const auto mode = d.get<std::string>("mode", "closed_form");
        if (mode == "closed_form")
            sc.mode = EvaluationMode::closed_form;
        else if (mode == "quadrature")
            sc.mode = EvaluationMode::quadrature;
        else
            throw ConfigError("driver.mode: expected closed_form or quadrature");
        d.finish();
    }

    {
        Section v = top.sub("volatility");
        sc.vol_kind = v.get<std::string>("kind");
        if (sc.vol_kind == "constant_vector") {
            sc.vol_params = v.list("value");
        } else if (sc.vol_kind == "exp_decay" || sc.vol_kind == "tanh_bounded") {
            sc.vol_params = v.list("amplitude");
            sc.vol_decay = v.get<double>("decay");
        } else if (sc.vol_kind == "linear_in_u") {
            sc.vol_params = v.list("slope");
        } else if (sc.vol_kind == "zero") {
            sc.vol_params.clear();
        } else {
            throw ConfigError("volatility.kind: unknown or non-builtin volatility '" + sc.vol_kind + "'");
        }
        if (v.has("r_budget")) sc.vol_r_budget = v.get<double>("r_budget");
        if (sc.vol_kind == "linear_in_u" && !sc.vol_r_budget)
            throw ConfigError("volatility.r_budget: required for linear_in_u");
        sc.drift_sign = v.get<int>("drift_sign", -1);
        if (sc.drift_sign != 1 && sc.drift_sign != -1) throw ConfigError("volatility.drift_sign: must be +1 or -1");
        v.finish();
    }

    sc.u0_values.assign(grid.size(), 0.0);
    {
        const Curve u0 = build_initial_curve(top.sub("initial_curve"), grid);
        sc.u0_values.assign(u0.values().begin(), u0.values().end());
    }

    {
        Section s = top.sub("solver");
        SolverConfig& c = sc.solver;
        c.T = s.get<double>("T");
        c.n_steps = s.get<std::size_t>("n_steps");
        c.n_paths = s.get<std::size_t>("n_paths");
        c.n_picard = s.get<std::size_t>("n_picard", 30);
        c.picard_tol = s.get<double>("picard_tol", 1e-10);
        c.R_local = s.get<double>("R_local", 1e6);
        c.p = s.get<double>("p", 2.0);
        const auto method = s.get<std::string>("method", "picard");
        if (method == "picard")
            c.method = SolverMethod::picard;
        else if (method == "euler")
            c.method = SolverMethod::euler;
        else
            throw ConfigError("solver.method: expected picard or euler");
        s.finish();
    }
    sc.solver.seed = top.get<std::uint64_t>("seed", 1);

    if (top.has("verify")) {
        Section v = top.sub("verify");
        YAML::Node list = v.raw("checks");
        if (!list.IsSequence()) throw ConfigError("verify.checks: expected a list" + where(list));
        for (std::size_t i = 0; i < list.size(); ++i)
            sc.checks.push_back(parse_check(Section(list[i], "verify.checks[" + std::to_string(i) + "]")));
        v.finish();
    }
    if (top.has("output")) {
        Section o = top.sub("output");
        sc.out_dir = o.get<std::string>("dir", "out");
        sc.curve_paths = o.get<std::size_t>("curve_paths", 4);
        o.finish();
    }
    top.finish();

    // cross-references
    try {
        const HjmModel model = sc.model();
        sc.solver.validate(model.driver());
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invariant violated: ") + e.what());
    }
    for (const auto& chk : sc.checks)
        if (chk.name == "martingale_bonds" || chk.name == "martingale_bonds_control")
            for (double m : chk.get_list("maturities", {2.0, 5.0}))
                if (m > sc.x_max)
                    throw ConfigError("verify: " + chk.name + " maturity " + std::to_string(m) + " exceeds grid x_max " +
                                      std::to_string(sc.x_max));
    return sc;
}

YAML::Node load_yaml(const std::string& text) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(std::string("parse error: ") + e.what());
    }
}

void set_dotted(YAML::Node root, const std::string& key, const std::string& value) {
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
    if (parts.empty()) throw ConfigError("sweep: empty parameter key");
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node next = chain.back()[parts[i]];
        if (!next.IsMap()) throw ConfigError("sweep: no section '" + parts[i] + "' for key " + key);
        chain.push_back(next);
    }
    if (!chain.back()[parts.back()]) throw ConfigError("sweep: key " + key + " not present in config");
    chain.back()[parts.back()] = YAML::Load(value);
}

}  // namespace

WeightGrid Scenario::grid() const { return make_grid(x_max, n_points, beta); }

LevyDriver Scenario::driver() const {
    if (family) return build_gamma_geometric(*family, r_ball, delta, p_max);
    return build_driver(components, r_ball, delta, p_max);
}

VolatilitySpec Scenario::volatility() const {
    VolatilitySpec v;
    if (vol_kind == "constant_vector") {
        v = constant_vector(vol_params, x_max);
    } else if (vol_kind == "exp_decay") {
        v = exp_decay(vol_params, vol_decay);
    } else if (vol_kind == "tanh_bounded") {
        v = tanh_bounded(vol_params, vol_decay);
    } else if (vol_kind == "linear_in_u") {
        v = linear_in_u(vol_params, vol_r_budget.value_or(0.0));
    } else if (vol_kind == "zero") {
        v = zero_volatility(driver().dimension());
    } else {
        throw ConfigError("volatility: unknown kind " + vol_kind);
    }
    if (vol_r_budget && vol_kind != "linear_in_u") v.r_budget = *vol_r_budget;
    return v;
}

HjmModel Scenario::model() const { return HjmModel(volatility(), driver(), grid(), drift_sign, mode); }

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    return parse_node(load_yaml(text), text, origin);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

Scenario parse_scenario_with_override(const std::string& text, const std::string& origin, const std::string& key,
                                      const std::string& value) {
    YAML::Node root = load_yaml(text);
    set_dotted(root, key, value);
    YAML::Emitter out;
    out << root;
    std::string echoed = out.c_str();
    echoed += "\n";
    return parse_node(load_yaml(echoed), echoed, origin + " [" + key + "=" + value + "]");
}

std::vector<std::string> known_checks() {
    std::vector<std::string> names;
    for (const auto& [name, keys] : check_keys()) names.push_back(name);
    return names;
}

// --- Check dispatch ---

namespace {

std::size_t as_count(double v, const std::string& what) {
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(what + ": expected a positive integer");
    return static_cast<std::size_t>(v);
}

std::uint64_t check_seed(const Scenario& sc, const CheckSpec& spec, std::uint64_t salt) {
    return static_cast<std::uint64_t>(spec.get("seed", static_cast<double>(sc.solver.seed * 1000 + salt)));
}

/// phi^k(x) = (e^{-x} - e^{-x_max}) / (k + 1), vanishing at x_max.
VectorCurve base_integrand(const WeightGrid& grid, std::size_t d) {
    VectorCurve v(d, grid.size());
    const double tail = std::exp(-grid.x_max());
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < grid.size(); ++i)
            v(k, i) = (std::exp(-grid.nodes()[i]) - tail) / static_cast<double>(k + 1);
    return v;
}

std::vector<VectorCurve> step_integrand(const WeightGrid& grid, std::size_t d, std::size_t n_steps) {
    const VectorCurve base = base_integrand(grid, d);
    std::vector<VectorCurve> steps;
    for (std::size_t j = 0; j < n_steps; ++j) {
        VectorCurve v = base;
        if (2 * j >= n_steps)
            for (std::size_t k = 0; k < d; ++k)
                for (auto& a : v.component(k)) a *= 0.5;
        steps.push_back(std::move(v));
    }
    return steps;
}

std::vector<CheckReport> maximal_checks(const Scenario& sc, const CheckSpec& spec, bool conv) {
    const WeightGrid grid = sc.grid();
    const double dt = spec.get("dt", 1.0 / 16.0);
    const auto horizons = spec.get_list("horizons", {0.5, 1.0, 2.0});
    std::vector<double> ps;
    for (double p : spec.get_list("p", {2.0, 4.0}))
        if (p <= sc.p_max) ps.push_back(p);
    const std::size_t n_paths = as_count(spec.get("n_paths", 20000), "n_paths");
    const std::uint64_t seed = check_seed(sc, spec, conv ? 6 : 5);
    std::vector<std::pair<std::string, LevyDriver>> drivers;
    if (spec.get("driver_sweep", 0.0) != 0.0) {
        drivers.emplace_back("wiener", build_driver({LevyComponent::wiener(1.0)}, 1.0, 1.5));
        drivers.emplace_back("gamma", build_driver({LevyComponent::gamma(1.0, 2.0)}, 1.0, 1.5));
        drivers.emplace_back("cpp", build_driver({LevyComponent::compound_poisson(1.0, 1.0)}, 1.0, 1.5));
    } else {
        drivers.emplace_back("scenario", sc.driver());
    }
    std::vector<MaximalCell> table;
    for (const auto& [label, drv] : drivers) {
        auto cells = maximal_inequality_table(label, drv, grid, base_integrand(grid, drv.dimension()), horizons, ps, dt,
                                              n_paths, seed);
        table.insert(table.end(), cells.begin(), cells.end());
    }
    std::vector<CheckReport> out;
    for (const auto& c : table) out.push_back(conv ? verify_convolution_inequality(c) : verify_bichteler_jacod(c));
    const std::string prefix = conv ? "convolution_inequality" : "bichteler_jacod";
    for (auto& r : verify_maximal_stability(table))
        if (r.name.rfind(prefix, 0) == 0) out.push_back(r);
    return out;
}

std::vector<CheckReport> bond_checks(const Scenario& sc, const CheckSpec& spec, bool control) {
    HjmModel model = sc.model();
    if (control) model = model.with_drift_sign(-model.drift_sign());
    SolverConfig cfg = sc.solver;
    cfg.T = spec.get("T", 1.0);
    cfg.n_steps = as_count(spec.get("n_steps", 16), "n_steps");
    cfg.n_paths = as_count(spec.get("n_paths", 20000), "n_paths");
    cfg.seed = check_seed(sc, spec, 7);
    auto reps = verify_martingale_bonds(model, sc.initial_curve(), spec.get_list("maturities", {2.0, 5.0}), cfg);
    if (!control) return reps;
    std::vector<CheckReport> out;
    for (const auto& r : reps) out.push_back(negated("martingale_bonds_control" + r.name.substr(16), r));
    return out;
}

}  // namespace

std::vector<CheckReport> run_check(const Scenario& sc, const CheckSpec& spec) {
    const std::string& n = spec.name;
    const WeightGrid grid = sc.grid();
    auto one = [](CheckReport r) { return std::vector<CheckReport>{std::move(r)}; };

    if (n == "cumulant_derivatives")
        return one(verify_cumulant_derivatives(CumulantModel(sc.driver(), sc.mode),
                                               as_count(spec.get("n_points", 20), "n_points"), check_seed(sc, spec, 1),
                                               spec.tol.value_or(1e-6)));
    if (n == "cumulant_laplace")
        return one(verify_cumulant_laplace(CumulantModel(sc.driver(), sc.mode), as_count(spec.get("n_zeta", 20), "n_zeta"),
                                           as_count(spec.get("n_draws", 100000), "n_draws"), check_seed(sc, spec, 2)));
    if (n == "isometry" || n == "isometry_control") {
        const LevyDriver drv = sc.driver();
        const double T = spec.get("T", 1.0);
        const std::size_t steps = as_count(spec.get("n_steps", 8), "n_steps");
        const auto phi = step_integrand(grid, drv.dimension(), steps);
        const std::size_t n_paths = as_count(spec.get("n_paths", 20000), "n_paths");
        const double dt = T / static_cast<double>(steps);
        const std::uint64_t seed = check_seed(sc, spec, 3);
        if (n == "isometry")
            return one(verify_isometry(drv, grid, phi, dt, n_paths, seed, IntegrandTiming::left, spec.tol.value_or(0.0)));
        return one(negated("isometry_control",
                           verify_isometry(drv, grid, phi, dt, n_paths, seed, IntegrandTiming::right, 0.0)));
    }
    if (n == "bichteler_jacod") return maximal_checks(sc, spec, false);
    if (n == "convolution_inequality") return maximal_checks(sc, spec, true);
    if (n == "martingale_bonds") return bond_checks(sc, spec, false);
    if (n == "martingale_bonds_control") return bond_checks(sc, spec, true);
    if (n == "hypotheses")
        return one(verify_hypotheses(sc.model(), as_count(spec.get("sample_budget", 600), "sample_budget"),
                                     check_seed(sc, spec, 8)));
    if (n == "hs_growth")
        return one(verify_hs_growth(sc.model(), as_count(spec.get("n_curves", 100), "n_curves"), check_seed(sc, spec, 9)));
    if (n == "lipschitz")
        return verify_lipschitz(sc.model(), spec.get_list("radii", {1.0, 2.0, 4.0, 8.0}),
                                as_count(spec.get("n_pairs", 100), "n_pairs"), check_seed(sc, spec, 10),
                                spec.get("factor", 3.0));
    if (n == "modulus_norm")
        return one(verify_modulus_norm(sc.x_max, sc.n_points, sc.beta, sc.driver().dimension(),
                                       as_count(spec.get("n_curves", 1000), "n_curves"), check_seed(sc, spec, 11)));
    if (n == "embeddings")
        return one(verify_embeddings(sc.x_max, as_count(spec.get("n_points", static_cast<double>(sc.n_points)), "n_points"),
                                     sc.beta, as_count(spec.get("n_curves", 1000), "n_curves"),
                                     check_seed(sc, spec, 12), spec.get("rel_change", 0.01)));
    if (n == "gaussian_reduction")
        return one(verify_gaussian_reduction(grid, as_count(spec.get("n_specs", 10), "n_specs"), check_seed(sc, spec, 13),
                                             spec.tol.value_or(1e-10)));
    if (n == "zero_transport") return one(verify_zero_transport(grid, sc.initial_curve(), sc.solver));
    if (n == "additive_gaussian") {
        const WeightGrid g = make_grid(spec.get("x_max", 4.0), as_count(spec.get("n_points", 1025), "n_points"), sc.beta);
        std::vector<std::size_t> steps;
        for (double s : spec.get_list("steps", {64, 128, 256})) steps.push_back(as_count(s, "steps"));
        return one(verify_additive_gaussian(g, spec.get("sigma0", 0.2), spec.get("T", 1.0), steps,
                                            as_count(spec.get("n_paths", 8), "n_paths"), check_seed(sc, spec, 14)));
    }
    if (n == "picard_contraction") return one(verify_picard_contraction(sc.model(), sc.initial_curve(), sc.solver));
    if (n == "scheme_agreement") {
        SolverConfig cfg = sc.solver;
        cfg.n_paths = as_count(spec.get("n_paths", static_cast<double>(cfg.n_paths)), "n_paths");
        return one(verify_scheme_agreement(sc.model(), sc.initial_curve(), cfg,
                                           as_count(spec.get("levels", 3), "levels")));
    }
    if (n == "initial_datum_lipschitz") {
        SolverConfig cfg = sc.solver;
        cfg.n_paths = as_count(spec.get("n_paths", static_cast<double>(cfg.n_paths)), "n_paths");
        return one(verify_initial_datum_lipschitz(sc.model(), sc.initial_curve(), cfg,
                                                  as_count(spec.get("n_dirs", 10), "n_dirs"), check_seed(sc, spec, 15)));
    }
    throw ConfigError("unknown check " + n);
}

RunResult run_scenario(const Scenario& sc, RunMode mode) {
    RunResult result;
    const HjmModel model = sc.model();
    const Curve u0 = sc.initial_curve();
    const NoiseSource noise = default_noise(model.driver(), sc.solver);
    if (sc.solver.method == SolverMethod::picard) {
        PicardResult pr = picard_solve(model, u0, sc.solver, noise);
        result.residuals = pr.residuals;
        result.ensemble = std::move(pr.ensemble);
    } else {
        result.ensemble = euler_solve(model, u0, sc.solver, noise);
    }
    result.summary = summarize(result.ensemble, model.grid());
    if (mode == RunMode::verify)
        for (const auto& spec : sc.checks) {
            auto reps = run_check(sc, spec);
            result.checks.insert(result.checks.end(), reps.begin(), reps.end());
        }
    return result;
}

}  // namespace hjm
