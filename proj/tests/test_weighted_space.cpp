#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hjm/rng.hpp"
#include "hjm/weighted_space.hpp"

using namespace hjm;

namespace {
Curve sample(const WeightGrid& g, double (*f)(double)) {
    Curve c(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) c[i] = f(g.nodes()[i]);
    return c;
}
double exp_minus(double x) { return std::exp(-x); }
}  // namespace

TEST_CASE("grid construction") {
    const WeightGrid g = make_grid(10.0, 101, 0.1);
    CHECK(g.uniform());
    CHECK(g.spacing() == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(g.alpha().back() == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(g.alpha_at(10.0) == doctest::Approx(2.718281828459045).epsilon(1e-14));

    const WeightGrid small = make_grid(1.0, 3, 1.0);
    REQUIRE(small.size() == 3);
    CHECK(small.nodes()[0] == 0.0);
    CHECK(small.nodes()[1] == 0.5);
    CHECK(small.nodes()[2] == 1.0);

    CHECK_THROWS_AS(make_grid(0.0, 11, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1.0, 2, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1.0, 11, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(WeightGrid({0.0, 0.5, 0.4}, 0.1), std::invalid_argument);
}

TEST_CASE("trapezoid weights integrate linear functions exactly") {
    const WeightGrid g({0.0, 0.3, 1.0, 1.1, 2.5}, 0.2);
    std::vector<double> lin;
    for (double x : g.nodes()) lin.push_back(2.0 * x + 1.0);
    CHECK(integrate(lin, g) == doctest::Approx(2.5 * 2.5 + 2.5).epsilon(1e-14));
    std::vector<double> run(g.size());
    cumulative_integral(lin, g, run);
    CHECK(run.back() == doctest::Approx(integrate(lin, g)).epsilon(1e-14));
    CHECK(integral_to(lin, g, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    // flat past x_max
    CHECK(integral_to(lin, g, 3.5) == doctest::Approx(8.75 + 6.0).epsilon(1e-14));
    CHECK(interpolate(lin, g, 9.0) == doctest::Approx(6.0));
}

TEST_CASE("derivative is exact on quadratics, including the endpoints") {
    const WeightGrid g({0.0, 0.2, 0.5, 0.9, 1.0, 1.6}, 0.1);
    std::vector<double> q;
    for (double x : g.nodes()) q.push_back(3.0 * x * x - x + 2.0);
    const auto d = derivative(q, g);
    CHECK(d.front() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(d.back() == doctest::Approx(6.0 * 1.6 - 1.0).epsilon(1e-12));
    // centered differences are exact for quadratics on a uniform grid
    const WeightGrid u = make_grid(2.0, 21, 0.1);
    std::vector<double> qu;
    for (double x : u.nodes()) qu.push_back(3.0 * x * x - x + 2.0);
    const auto du = derivative(qu, u);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(du[i] == doctest::Approx(6.0 * u.nodes()[i] - 1.0).epsilon(1e-10));
}

TEST_CASE("norm_H") {
    const WeightGrid g = make_grid(8.0, 129, 0.1);
    CHECK(norm_H(Curve(g.size(), -0.7), g) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(norm_H(Curve(g.size(), 0.0), g) == 0.0);

    // |e^{-x}|^2 = 1 + int_0^inf e^{-2x} e^{0.1 x} dx = 1 + 1/1.9
    const WeightGrid wide = make_grid(40.0, 4001, 0.1);
    const Curve e = sample(wide, exp_minus);
    const double h = norm_H(e, wide);
    CHECK(h * h == doctest::Approx(1.0 + 1.0 / 1.9).epsilon(1e-3));
    CHECK(std::abs(h * h - 1.5263157894736843) < 1e-3);
}

TEST_CASE("norm_star") {
    const WeightGrid g = make_grid(8.0, 129, 0.1);
    CHECK(norm_star(Curve(g.size(), 1.3), g) == doctest::Approx(1.3).epsilon(1e-15));

    Curve bump(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) bump[i] = std::sin(M_PI * g.nodes()[i] / 8.0) + 0.25;
    bump[g.size() - 1] = bump[0];
    CHECK(norm_star(bump, g) == doctest::Approx(norm_H(bump, g)).epsilon(1e-15));

    const WeightGrid wide = make_grid(40.0, 4001, 0.1);
    const double s = norm_star(sample(wide, exp_minus), wide);
    CHECK(s == doctest::Approx(std::sqrt(1.0 / 1.9 + std::exp(-80.0))).epsilon(1e-3));
    CHECK(std::abs(s - 0.7255) < 1e-3);
}

TEST_CASE("norm on K-valued curves") {
    const WeightGrid g = make_grid(6.0, 97, 0.1);
    const Curve e = sample(g, exp_minus);
    CHECK(norm_frak_H(VectorCurve::from_components({e}), g) == doctest::Approx(norm_H(e, g)).epsilon(1e-15));
    CHECK(norm_frak_H(VectorCurve::from_components({e, Curve(g.size(), 0.0), Curve(g.size(), 0.0)}), g) ==
          doctest::Approx(norm_H(e, g)).epsilon(1e-15));
    const VectorCurve v = VectorCurve::from_components({Curve(g.size(), 3.0), Curve(g.size(), 4.0)});
    CHECK(norm_frak_H(v, g) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("shift") {
    const WeightGrid g = make_grid(4.0, 41, 0.1);
    const Curve c(g.size(), 0.042);
    CHECK(shift(c, 0.37, g) == c);

    const Curve e = sample(g, exp_minus);
    const Curve s = shift(e, g.spacing(), g);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(s[i] == e[i + 1]);
    CHECK(s[g.size() - 1] == e[g.size() - 1]);

    // off-grid shifts interpolate linearly and stay flat past x_max
    const Curve half = shift(e, 0.05, g);
    CHECK(half[0] == doctest::Approx(0.5 * (e[0] + e[1])).epsilon(1e-14));
    CHECK(shift(e, 100.0, g) == Curve(g.size(), e.back()));
    CHECK(shift(e, 0.0, g) == e);
}

TEST_CASE("shift contracts norm_star on curves vanishing at x_max") {
    const WeightGrid g = make_grid(8.0, 257, 0.1);
    double worst = -1.0;
    for (std::size_t k = 0; k < 200; ++k) {
        CounterRng rng(99, k, 0);
        const Curve u = RandomSmoothCurve::draw(rng).sample_vanishing(g);
        for (double t : {0.03125, 0.1, 0.5, 1.37, 4.0}) {
            const double before = norm_star(u, g), after = norm_star(shift(u, t, g), g);
            worst = std::max(worst, (after - before) / before);
        }
    }
    // aligned shifts are exact contractions; interpolation adds O(h^2)
    CHECK(worst <= 1e-3);
}

TEST_CASE("embedding ratios") {
    const WeightGrid g = make_grid(8.0, 257, 0.1);
    const EmbeddingRatios c = check_embeddings(Curve(g.size(), 2.5), g);
    CHECK(c.sup_ratio == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.l1_ratio == 0.0);
    CHECK(c.sq_ratio == 0.0);
    CHECK_THROWS_AS(check_embeddings(Curve(g.size(), 0.0), g), std::domain_error);

    const WeightGrid fine = make_grid(8.0, 513, 0.1);
    const EmbeddingRatios a = check_embeddings(sample(g, exp_minus), g);
    const EmbeddingRatios b = check_embeddings(sample(fine, exp_minus), fine);
    CHECK(std::isfinite(a.sup_ratio));
    CHECK(std::abs(b.sup_ratio - a.sup_ratio) / a.sup_ratio < 0.01);
    CHECK(std::abs(b.l1_ratio - a.l1_ratio) / a.l1_ratio < 0.01);
    CHECK(std::abs(b.sq_ratio - a.sq_ratio) / a.sq_ratio < 0.01);
    CHECK(a.sup_ratio <= std::sqrt(1.0 + 1.0 / 0.1));
}

TEST_CASE("curve arithmetic and size checks") {
    const WeightGrid g = make_grid(1.0, 5, 0.1);
    Curve a(5, 1.0), b(5, 2.0);
    CHECK((a + b) == Curve(5, 3.0));
    CHECK((b - a) == Curve(5, 1.0));
    CHECK((2.0 * b) == Curve(5, 4.0));
    CHECK_THROWS(norm_H(Curve(4, 1.0), g));
    CHECK_THROWS(a += Curve(3, 1.0));
}
