#include <doctest.h>

#include <cmath>
#include <limits>

#include "hjm/hjm_model.hpp"
#include "hjm/rng.hpp"

using namespace hjm;

namespace {
LevyDriver wiener(double r_ball = 2.0) { return build_driver({LevyComponent::wiener(1.0)}, r_ball, 1.5); }
LevyDriver gamma12(double r_ball = 0.5) { return build_driver({LevyComponent::gamma(1.0, 2.0)}, r_ball, 1.5); }

Curve test_curve(const WeightGrid& g) {
    Curve u(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = 0.03 + 0.02 * std::exp(-g.nodes()[i]) * std::cos(g.nodes()[i]);
    return u;
}
}  // namespace

TEST_CASE("model construction validates its inputs") {
    const WeightGrid g = make_grid(4.0, 41, 0.1);
    CHECK_THROWS_AS(HjmModel(constant_vector({0.1, 0.1}, 4.0), wiener(), g), std::invalid_argument);
    CHECK_THROWS_AS(HjmModel(constant_vector({0.1}, 4.0), wiener(), g, 0), std::invalid_argument);
    // |s| x_max = 0.8 > r_ball
    CHECK_THROWS_AS(HjmModel(constant_vector({0.2}, 4.0), wiener(0.5), g), std::invalid_argument);
    const HjmModel m(constant_vector({0.1}, 4.0), wiener(), g);
    CHECK(m.with_drift_sign(1).drift_sign() == 1);
}

TEST_CASE("apply_B") {
    const WeightGrid g = make_grid(4.0, 41, 0.1);
    const Curve u = test_curve(g);
    const HjmModel c(constant_vector({0.1, -0.3}, 4.0),
                     build_driver({LevyComponent::wiener(1.0), LevyComponent::wiener(1.0)}, 2.0, 1.5), g);
    CHECK(apply_B(c, 0.0, u, std::vector<double>{0.0, 0.0}) == Curve(g.size(), 0.0));
    const Curve b = apply_B(c, 0.0, u, std::vector<double>{2.0, 1.0});
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(b[i] == doctest::Approx(0.2 - 0.3).epsilon(1e-15));

    const HjmModel e(exp_decay({0.3}, 1.0), wiener(), g);
    const Curve be = apply_B(e, 0.0, u, std::vector<double>{1.0});
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(be[i] == doctest::Approx(0.3 * std::exp(-g.nodes()[i])));
}

TEST_CASE("Hilbert-Schmidt norm") {
    const WeightGrid g = make_grid(4.0, 81, 0.1);
    const Curve u = test_curve(g);
    CHECK(hs_norm_B(HjmModel(zero_volatility(1), wiener(), g), 0.0, u) == 0.0);
    const double gamma = 0.7;
    const HjmModel lin(linear_in_u({gamma}, 1.0), wiener(), g);
    CHECK(hs_norm_B(lin, 0.0, u) == doctest::Approx(gamma * std::sqrt(weighted_seminorm_sq(u.values(), g))));
    // hand integration: u' = -0.02 e^{-x} (cos x + sin x)
    double s = 0.0;
    const std::size_t n = 40000;
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = 4.0 * static_cast<double>(i) / n, w = (i == 0 || i == n) ? 0.5 : 1.0;
        const double d = -0.02 * std::exp(-x) * (std::cos(x) + std::sin(x));
        s += w * d * d * std::exp(0.1 * x) * 4.0 / n;
    }
    CHECK(hs_norm_B(lin, 0.0, u) == doctest::Approx(gamma * std::sqrt(s)).epsilon(1e-3));
    CHECK(hs_norm_B(lin, 0.0, u) * hs_norm_B(lin, 0.0, u) <= hs_growth_bound_sq(lin, 0.0, u));
}

TEST_CASE("drift") {
    const WeightGrid g = make_grid(4.0, 81, 0.1);
    const Curve u = test_curve(g);
    CHECK(hjm_drift(HjmModel(zero_volatility(1), gamma12(), g), 0.0, u) == Curve(g.size(), 0.0));

    // classical HJM: f(x) = sigma0^2 x
    const double s0 = 0.2;
    const Curve f = hjm_drift(HjmModel(constant_vector({s0}, 4.0), wiener(1.0), g), 0.0, u);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(f[i] - s0 * s0 * g.nodes()[i]) <= 1e-12);

    // gamma(1, 2), sigma0 = 0.1: f(1) = -0.1 Dpsi(-0.1), Dpsi(-0.1) = 1/2.1 - 1/2
    const HjmModel gm(constant_vector({0.1}, 4.0), gamma12(), g);
    const Curve fg = hjm_drift(gm, 0.0, u);
    const std::size_t at1 = 20;
    REQUIRE(g.nodes()[at1] == doctest::Approx(1.0));
    CHECK(fg[at1] == doctest::Approx(-0.1 * (1.0 / 2.1 - 0.5)).epsilon(1e-12));
    CHECK(std::abs(fg[at1] - 0.00238095) < 1e-8);
    const Curve fp = hjm_drift(gm.with_drift_sign(1), 0.0, u);
    CHECK(fp[at1] == doctest::Approx(-fg[at1]));

    // the unsigned functional: f = drift_sign * g
    const Curve gfun = drift_functional(gm, sigma_curve(gm, 0.0, u));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(gfun[i] == doctest::Approx(-fg[i]).epsilon(1e-14));
}

TEST_CASE("drift signals ball violations") {
    const WeightGrid g = make_grid(4.0, 41, 0.1);
    // running integral u x reaches 4 > r_ball
    const HjmModel m(linear_in_u({1.0}, 0.5), wiener(0.5), g);
    CHECK_THROWS_AS(hjm_drift(m, 0.0, Curve(g.size(), 1.0)), BallViolation);
    CHECK_NOTHROW(hjm_drift(m, 0.0, Curve(g.size(), 0.1)));
}

TEST_CASE("hypothesis audit") {
    const WeightGrid g = make_grid(4.0, 41, 0.1);
    const HypothesisReport t = check_hypotheses(HjmModel(tanh_bounded({0.1}, 1.0), gamma12(), g), 400);
    CHECK(t.all_pass());
    for (const char* n : {"smoothness_C012", "lipschitz_sigma_x", "bounded_sigma_u", "sigma_at_zero_bounded"})
        CHECK(t.at(n).pass);

    const HypothesisReport z = check_hypotheses(HjmModel(zero_volatility(1), gamma12(), g), 200);
    CHECK(z.all_pass());

    const HypothesisReport q = check_hypotheses(HjmModel(quadratic_in_u({0.05}, 1.0, 0.4), gamma12(), g), 400);
    const HypothesisEntry& e = q.at("bounded_sigma_u");
    CHECK_FALSE(e.pass);
    REQUIRE(e.margin_by_range.size() >= 3);
    // violation grows with the sampled range
    CHECK(e.margin_by_range.back() > e.margin_by_range[e.margin_by_range.size() - 2]);
    CHECK(e.margin_by_range.back() > 0.0);
}

TEST_CASE("local Lipschitz quotients") {
    const WeightGrid g = make_grid(4.0, 41, 0.1);
    const double gamma = 0.3;
    const HjmModel lin(linear_in_u({gamma}, 20.0), build_driver({LevyComponent::wiener(1.0)}, 20.0, 1.5), g);
    double prev = std::numeric_limits<double>::infinity();
    for (double R : {1.0, 2.0, 4.0, 8.0}) {
        const LipschitzEstimate e = lipschitz_estimate(lin, LipschitzTarget::B, R, 100);
        CHECK(e.pairs_used > 0);
        CHECK(e.raw <= gamma * (1.0 + 1e-12));
        CHECK(e.raw >= 0.5 * gamma);
        CHECK(e.constant < prev);
        prev = e.constant;
    }
    const HjmModel tb(tanh_bounded({0.1}, 1.0), gamma12(), g);
    const LipschitzEstimate eg = lipschitz_estimate(tb, LipschitzTarget::g, 2.0, 50);
    CHECK(std::isfinite(eg.constant));
    CHECK(eg.pairs_used > 0);
}

TEST_CASE("modulus norm is dominated by the K-valued norm") {
    const WeightGrid g = make_grid(8.0, 257, 0.1);
    for (std::size_t k = 0; k < 1000; ++k) {
        CounterRng rng(3, k, 0);
        std::vector<Curve> comps;
        for (int c = 0; c < 3; ++c) comps.push_back(RandomSmoothCurve::draw(rng).sample(g));
        const NormComparison n = compare_modulus_norm(VectorCurve::from_components(comps), g);
        CHECK(n.modulus_norm <= n.frak_norm * (1.0 + 1e-12));
    }
}
