#include <doctest.h>
#include <omp.h>

#include <cmath>

#include "hjm/mild_solver.hpp"

using namespace hjm;

namespace {
HjmModel gamma_model(const WeightGrid& g) {
    return HjmModel(tanh_bounded({0.1, 0.05}, 1.0), build_gamma_geometric({1.0, 0.5, 2.0, 2}, 0.6, 1.5), g);
}

Curve initial(const WeightGrid& g) {
    Curve u(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = 0.03 + 0.01 * (1.0 - std::exp(-g.nodes()[i]));
    return u;
}

SolverConfig config(std::size_t steps, std::size_t paths, double T = 0.5) {
    SolverConfig c;
    c.T = T;
    c.n_steps = steps;
    c.n_paths = paths;
    c.n_picard = 30;
    c.picard_tol = 1e-12;
    c.seed = 42;
    return c;
}
}  // namespace

TEST_CASE("config validation") {
    const LevyDriver d = build_driver({LevyComponent::wiener(1.0)}, 1.0, 1.5, 4.0);
    SolverConfig c = config(8, 4);
    CHECK_NOTHROW(c.validate(d));
    c.p = 6.0;
    CHECK_THROWS_AS(c.validate(d), std::invalid_argument);
    c = config(8, 4, -1.0);
    CHECK_THROWS_AS(c.validate(d), std::invalid_argument);
    c = config(0, 4);
    CHECK_THROWS_AS(c.validate(d), std::invalid_argument);
}

TEST_CASE("zero volatility is exact transport") {
    const WeightGrid g = make_grid(4.0, 65, 0.1);
    const HjmModel m(zero_volatility(1), build_driver({LevyComponent::wiener(1.0)}, 1.0, 1.5), g);
    const Curve u0 = initial(g);
    const SolverConfig cfg = config(16, 3, 1.0);
    const PicardResult pr = picard_solve(m, u0, cfg);
    CHECK(pr.sweeps == 1);
    CHECK(pr.converged);
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t j = 0; j < cfg.n_times(); ++j) CHECK(pr.ensemble.curve_copy(p, j) == shift(u0, cfg.time(j), g));
    CHECK(euler_solve(m, u0, cfg) == pr.ensemble);
}

TEST_CASE("one Euler step by hand") {
    const WeightGrid g = make_grid(4.0, 65, 0.1);
    const HjmModel m(exp_decay({0.2}, 0.5), build_driver({LevyComponent::gamma(1.0, 2.0)}, 0.5, 1.5), g);
    const Curve u0 = initial(g);
    SolverConfig cfg = config(1, 1, 0.0625);
    const NoiseSource noise = default_noise(m.driver(), cfg);
    const SolutionEnsemble e = euler_solve(m, u0, cfg, noise);
    const double dm = noise.increment(0, 0)[0];
    const Curve f = hjm_drift(m, 0.0, u0);
    const Curve expect = shift(u0, cfg.dt(), g) + cfg.dt() * f + apply_B(m, 0.0, u0, std::vector<double>{dm});
    const Curve got = e.curve_copy(0, 1);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-14));
}

TEST_CASE("stochastic convolution") {
    const WeightGrid g = make_grid(4.0, 65, 0.1);
    const HjmModel m(zero_volatility(1), build_driver({LevyComponent::wiener(1.0)}, 1.0, 1.5), g);
    VectorCurve phi(1, g.size());
    for (std::size_t i = 0; i < g.size(); ++i) phi(0, i) = std::exp(-g.nodes()[i]);
    const std::vector<VectorCurve> F(4, phi);
    const double dt = 0.0625;
    std::vector<std::vector<double>> zero(4, std::vector<double>{0.0});
    CHECK(stochastic_convolution(m, F, zero, dt, 4) == Curve(g.size(), 0.0));
    // a single jump in step 1 is transported for the remaining 3 steps
    std::vector<std::vector<double>> jump = zero;
    jump[1][0] = 0.7;
    const Curve c = stochastic_convolution(m, F, jump, dt, 4);
    Curve single(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) single[i] = 0.7 * phi(0, i);
    const Curve expect = shift(single, 3 * dt, g);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(c[i] == doctest::Approx(expect[i]).epsilon(1e-15));
}

TEST_CASE("parallel solvers equal the serial reference bitwise") {
    const WeightGrid g = make_grid(8.0, 129, 0.1);
    const HjmModel m = gamma_model(g);
    const Curve u0 = initial(g);
    const SolverConfig cfg = config(8, 24);
    const NoiseSource noise = default_noise(m.driver(), cfg);

    const SolutionEnsemble ref_e = reference::euler_solve(m, u0, cfg, noise);
    const PicardResult ref_p = reference::picard_solve(m, u0, cfg, noise);
    for (int threads : {1, 3, 8}) {
        CAPTURE(threads);
        omp_set_num_threads(threads);
        CHECK(euler_solve(m, u0, cfg, noise) == ref_e);
        const PicardResult pr = picard_solve(m, u0, cfg, noise);
        CHECK(pr.ensemble == ref_p.ensemble);
        CHECK(pr.residuals == ref_p.residuals);
    }
    omp_set_num_threads(1);
}

TEST_CASE("Picard reaches the Euler fixed point of its own recursion") {
    const WeightGrid g = make_grid(8.0, 129, 0.1);
    const HjmModel m = gamma_model(g);
    const Curve u0 = initial(g);
    const SolverConfig cfg = config(8, 16);
    const PicardResult pr = picard_solve(m, u0, cfg);
    CHECK(pr.converged);
    CHECK(pr.sweeps <= cfg.n_steps + 1);
    CHECK(pr.contraction_ratio() < 1.0);
    for (std::size_t m2 = 2; m2 < pr.residuals.size(); ++m2) CHECK(pr.residuals[m2] < pr.residuals[m2 - 1]);
    // the recursion is triangular, so its fixed point differs from the Euler
    // scheme by O(dt) only through the drift and noise evaluation point
    const SolutionEnsemble e = euler_solve(m, u0, cfg);
    const PathNorms d = difference_norms(pr.ensemble, e, g);
    CHECK(norm_script_Hp(d, 2.0).value < 1e-3);
}

TEST_CASE("Picard stall raises") {
    const WeightGrid g = make_grid(4.0, 33, 0.1);
    // linear volatility, wide ball and no localization: residuals blow up
    const HjmModel m(linear_in_u({1.0}, 1e3), build_driver({LevyComponent::wiener(1.0)}, 1e3, 1.5), g);
    SolverConfig cfg = config(32, 8, 4.0);
    cfg.n_picard = 6;
    cfg.R_local = 1e12;
    CHECK_THROWS_AS(picard_solve(m, Curve(g.size(), 1.0), cfg), NonConvergenceError);
}

TEST_CASE("localization freezes paths") {
    const WeightGrid g = make_grid(4.0, 33, 0.1);
    const HjmModel m(exp_decay({0.5}, 0.5), build_driver({LevyComponent::wiener(1.0)}, 2.0, 1.5), g);
    SolverConfig cfg = config(16, 64, 1.0);
    const Curve u0 = initial(g);
    cfg.R_local = norm_H(u0, g) * 1.5;
    for (int method = 0; method < 2; ++method) {
        const SolutionEnsemble e = method == 0 ? euler_solve(m, u0, cfg) : picard_solve(m, u0, cfg).ensemble;
        std::size_t exited = 0;
        for (std::size_t p = 0; p < e.n_paths; ++p) {
            const std::size_t k = e.exit_index[p];
            if (k == never_exited) continue;
            ++exited;
            CHECK(k >= 1);
            CHECK(norm_H(e.curve(p, k), g) > cfg.R_local);
            for (std::size_t j = k; j < e.n_times; ++j) CHECK(e.curve_copy(p, j) == e.curve_copy(p, k));
            CHECK(e.exit_time(p) == doctest::Approx(cfg.time(k)));
        }
        CHECK(exited > 0);
        CHECK(e.n_alive(0) == e.n_paths);
        CHECK(e.n_alive(e.n_times - 1) == e.n_paths - exited);
    }
}

TEST_CASE("norm estimators") {
    const WeightGrid g = make_grid(4.0, 65, 0.1);
    const HjmModel z(zero_volatility(1), build_driver({LevyComponent::wiener(1.0)}, 1.0, 1.5), g);
    const Curve u0 = initial(g);
    const SolverConfig cfg = config(8, 5, 1.0);
    const SolutionEnsemble det = euler_solve(z, u0, cfg);
    double sup = 0.0;
    for (std::size_t j = 0; j < cfg.n_times(); ++j) sup = std::max(sup, norm_H(shift(u0, cfg.time(j), g), g));
    for (double p : {2.0, 4.0}) {
        CHECK(norm_script_Hp(det, g, p).value == doctest::Approx(sup).epsilon(1e-14));
        CHECK(norm_bb_Hp(det, g, p).value == doctest::Approx(sup).epsilon(1e-14));
    }

    const HjmModel w(constant_vector({0.2}, 4.0), build_driver({LevyComponent::wiener(1.0)}, 1.0, 1.5), g);
    SolverConfig sc = config(16, 4000, 1.0);
    const SolutionEnsemble e = euler_solve(w, u0, sc);
    const PathNorms pn = path_norms(e, g);
    for (double p : {2.0, 4.0}) {
        const NormEstimate s = norm_script_Hp(pn, p), b = norm_bb_Hp(pn, p);
        CHECK(std::isfinite(s.value));
        CHECK(s.standard_error > 0.0);
        CHECK(b.value >= s.value);
    }
    // stable under path doubling
    sc.n_paths = 8000;
    const NormEstimate a = norm_bb_Hp(pn, 2.0), b = norm_bb_Hp(euler_solve(w, u0, sc), g, 2.0);
    CHECK(std::abs(a.value - b.value) <= 2.0 * std::hypot(a.standard_error, b.standard_error));

    const auto rows = summarize(e, g);
    CHECK(rows.size() == sc.n_times());
    CHECK(rows.front().t == 0.0);
    CHECK(rows.back().n_alive == 4000);
}

TEST_CASE("Lipschitz dependence on the initial datum") {
    const WeightGrid g = make_grid(4.0, 65, 0.1);
    const Curve u0 = initial(g);
    Curve v0 = u0;
    for (std::size_t i = 0; i < g.size(); ++i) v0[i] += 0.01 * std::cos(g.nodes()[i]);
    const SolverConfig cfg = config(8, 20, 1.0);

    const HjmModel z(zero_volatility(1), build_driver({LevyComponent::wiener(1.0)}, 1.0, 1.5), g);
    CHECK_THROWS_AS(lipschitz_in_initial_datum(z, u0, u0, cfg), std::invalid_argument);
    double sup = 0.0;
    const Curve d = u0 - v0;
    for (std::size_t j = 0; j < cfg.n_times(); ++j) sup = std::max(sup, norm_H(shift(d, cfg.time(j), g), g));
    CHECK(lipschitz_in_initial_datum(z, u0, v0, cfg) == doctest::Approx(sup / norm_H(d, g)).epsilon(1e-12));
    CHECK(sup / norm_H(d, g) <= std::sqrt(2.0 + 1.0 / 0.1));

    const HjmModel m(tanh_bounded({0.1}, 1.0), build_driver({LevyComponent::gamma(1.0, 2.0)}, 0.5, 1.5), g);
    const double r = lipschitz_in_initial_datum(m, u0, v0, cfg);
    CHECK(std::isfinite(r));
    CHECK(r > 0.5);
}

TEST_CASE("identical seeds give identical ensembles") {
    const WeightGrid g = make_grid(8.0, 129, 0.1);
    const HjmModel m = gamma_model(g);
    SolverConfig cfg = config(8, 10);
    CHECK(picard_solve(m, initial(g), cfg).ensemble == picard_solve(m, initial(g), cfg).ensemble);
    const SolutionEnsemble a = euler_solve(m, initial(g), cfg);
    cfg.seed = 43;
    CHECK_FALSE(euler_solve(m, initial(g), cfg) == a);
}
