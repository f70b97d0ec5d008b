#include <doctest.h>

#include <cmath>

#include "hjm/verifiers.hpp"

using namespace hjm;

namespace {
LevyDriver wiener1(double r = 1.0) { return build_driver({LevyComponent::wiener(1.0)}, r, 1.5); }
LevyDriver gamma12(double r = 0.5) { return build_driver({LevyComponent::gamma(1.0, 2.0)}, r, 1.5); }

VectorCurve decaying(const WeightGrid& g, double scale = 1.0) {
    VectorCurve v(1, g.size());
    const double tail = std::exp(-g.x_max());
    for (std::size_t i = 0; i < g.size(); ++i) v(0, i) = scale * (std::exp(-g.nodes()[i]) - tail);
    return v;
}

Curve initial(const WeightGrid& g) {
    Curve u(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = 0.03 + 0.01 * (1.0 - std::exp(-g.nodes()[i]));
    return u;
}

SolverConfig config(double T, std::size_t steps, std::size_t paths) {
    SolverConfig c;
    c.T = T;
    c.n_steps = steps;
    c.n_paths = paths;
    c.n_picard = 30;
    c.picard_tol = 1e-12;
    c.seed = 9;
    return c;
}
}  // namespace

TEST_CASE("check semantics") {
    CHECK(identity_check("a", 1.0, 1.0, 0.0, 0.0, 1).pass);
    CHECK_FALSE(identity_check("a", 1.1, 1.0, 0.0, 0.01, 1).pass);
    CHECK(identity_check("a", 1.1, 1.0, 0.04, 0.0, 1).pass);
    CHECK(inequality_check("b", 1.0, 2.0, 0.0, 0.0, 1).pass);
    CHECK_FALSE(inequality_check("b", 2.5, 2.0, 0.0, 0.1, 1).pass);
    const CheckReport n = negated("c", inequality_check("b", 2.5, 2.0, 0.0, 0.1, 1));
    CHECK(n.pass);
    CHECK(n.detail.find("negative control") != std::string::npos);
}

TEST_CASE("cumulant checks") {
    for (const LevyDriver& d : {gamma12(), build_gamma_geometric({1.0, 0.5, 2.0, 3}, 0.6, 1.5)}) {
        const CumulantModel cm(d);
        CHECK(verify_cumulant_derivatives(cm, 20, 1, 1e-6).pass);
        CHECK(verify_cumulant_laplace(cm, 10, 100000, 2).pass);
    }
}

TEST_CASE("isometry") {
    const WeightGrid g = make_grid(8.0, 65, 0.1);
    const std::vector<VectorCurve> zero(4, VectorCurve(1, g.size()));
    const CheckReport z = verify_isometry(wiener1(), g, zero, 0.25, 100, 3);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
    CHECK(z.pass);

    std::vector<VectorCurve> step(8, decaying(g));
    for (std::size_t j = 4; j < 8; ++j) step[j] = decaying(g, 0.5);
    for (const LevyDriver& d : {wiener1(), gamma12(), build_driver({LevyComponent::compound_poisson(1.0, 1.0)}, 1.0, 1.5)}) {
        CHECK(verify_isometry(d, g, step, 0.125, 20000, 4).pass);
        // anticipating integrand: the predictable-integrand identity must break
        CHECK_FALSE(verify_isometry(d, g, step, 0.125, 20000, 4, IntegrandTiming::right).pass);
    }
}

TEST_CASE("maximal inequalities") {
    const WeightGrid g = make_grid(8.0, 65, 0.1);
    const auto table = maximal_inequality_table("wiener", wiener1(), g, decaying(g), {0.5, 1.0}, {2.0, 4.0},
                                                1.0 / 16.0, 5000, 5);
    REQUIRE(table.size() == 4);
    for (const auto& c : table) {
        CHECK(std::isfinite(c.n_hat_bj()));
        CHECK(c.n_hat_bj() > 0.0);
        CHECK(verify_bichteler_jacod(c).pass);
        CHECK(verify_convolution_inequality(c).pass);
        // the semigroup contracts |.|_* on curves vanishing at infinity
        CHECK(c.lhs_conv <= 2.0 * c.lhs_mart_star);
        if (c.p == 2.0) {
            CHECK(c.n_hat_bj() <= 4.4);
            // paired runs: convolution and martingale constants comparable
            CHECK(c.n_hat_conv() <= 2.0 * c.n_hat_bj());
            CHECK(c.n_hat_bj() <= 2.0 * c.n_hat_conv());
        }
    }
    const auto stab = verify_maximal_stability(table);
    CHECK(stab.size() == 8);
}

TEST_CASE("martingale bonds") {
    const WeightGrid g = make_grid(8.0, 129, 0.1);
    const Curve u0 = initial(g);
    const SolverConfig cfg = config(1.0, 16, 4000);

    const HjmModel zero(zero_volatility(1), wiener1(), g);
    for (const auto& r : verify_martingale_bonds(zero, u0, {2.0, 5.0}, config(1.0, 16, 3))) {
        CHECK(r.pass);
        CHECK(std::abs(r.lhs) < 1e-14);
    }

    const HjmModel w(constant_vector({0.2}, 8.0), wiener1(2.0), g);
    for (const auto& r : verify_martingale_bonds(w, u0, {2.0, 5.0}, cfg)) CHECK(r.pass);
    for (const auto& r : verify_martingale_bonds(w.with_drift_sign(1), u0, {2.0, 5.0}, cfg)) CHECK_FALSE(r.pass);

    CHECK_THROWS_AS(verify_martingale_bonds(w, u0, {9.0}, cfg), std::invalid_argument);
}

TEST_CASE("model-layer checks") {
    const WeightGrid g = make_grid(8.0, 129, 0.1);
    CHECK(verify_gaussian_reduction(g, 10, 6).pass);
    const HjmModel m(tanh_bounded({0.1, 0.05}, 1.0), build_gamma_geometric({1.0, 0.5, 2.0, 2}, 0.4, 1.5), g);
    CHECK(verify_hs_growth(m, 50, 7).pass);
    CHECK(verify_hypotheses(m, 200, 8).pass);
    for (const auto& r : verify_lipschitz(m, {1.0, 2.0, 4.0, 8.0}, 50, 9)) CHECK(r.pass);
    const CheckReport mod = verify_modulus_norm(8.0, 129, 0.1, 2, 200, 10);
    CHECK(mod.pass);
    CHECK(mod.lhs <= 0.0);
    CHECK(verify_embeddings(8.0, 513, 0.1, 200, 11).pass);

    const HjmModel q(quadratic_in_u({0.05}, 1.0, 0.4), gamma12(), g);
    CHECK_FALSE(verify_hypotheses(q, 200, 8).pass);
}

TEST_CASE("solver checks") {
    const WeightGrid g = make_grid(4.0, 65, 0.1);
    CHECK(verify_zero_transport(g, initial(g), config(1.0, 16, 2)).pass);
    // non-aligned step: transport by interpolation, still bitwise across solvers
    CHECK(verify_zero_transport(g, initial(g), config(1.0, 7, 2)).pass);

    CHECK(verify_additive_gaussian(make_grid(4.0, 513, 0.1), 0.2, 1.0, {32, 64, 128}, 50, 12).pass);

    const WeightGrid g8 = make_grid(8.0, 129, 0.1);
    const HjmModel m(tanh_bounded({0.1, 0.05}, 1.0), build_gamma_geometric({1.0, 0.5, 2.0, 2}, 0.4, 1.5), g8);
    const SolverConfig cfg = config(0.5, 8, 50);
    CHECK(verify_scheme_agreement(m, initial(g8), cfg, 3).pass);
    CHECK(verify_picard_contraction(m, initial(g8), cfg).pass);
    CHECK(verify_initial_datum_lipschitz(m, initial(g8), cfg, 4, 13).pass);
}
