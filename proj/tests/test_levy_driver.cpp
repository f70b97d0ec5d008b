#include <doctest.h>

#include <cmath>
#include <vector>

#include "hjm/levy_driver.hpp"
#include "hjm/stats.hpp"

using namespace hjm;

namespace {
LevyDriver gamma12(double r = 1.0) { return build_driver({LevyComponent::gamma(1.0, 2.0)}, r, 1.5); }
std::vector<double> one(double z) { return {z}; }
}  // namespace

TEST_CASE("driver validation") {
    CHECK_NOTHROW(build_driver({LevyComponent::wiener(1.0)}, 50.0, 1.5));

    // c^k = 2^{-k}, alpha^k = 2, delta r = 1 < 2
    std::vector<LevyComponent> fam;
    for (int k = 1; k <= 6; ++k) fam.push_back(LevyComponent::gamma(std::pow(2.0, -k), 2.0));
    CHECK_NOTHROW(build_driver(fam, 1.0 / 1.5, 1.5));

    // delta r = 1 >= alpha = 0.5
    try {
        build_driver({LevyComponent::gamma(1.0, 0.5)}, 1.0 / 1.5, 1.5);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("exponential") != std::string::npos);
    }
    CHECK_THROWS_AS(build_driver({}, 1.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(build_driver({LevyComponent::wiener(-1.0)}, 1.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(build_driver({LevyComponent::compound_poisson(0.0, 1.0)}, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("gamma geometric family records its truncation") {
    const LevyDriver d = build_gamma_geometric({1.0, 0.5, 2.0, 4}, 0.5, 1.5);
    CHECK(d.dimension() == 4);
    REQUIRE(d.tail().has_value());
    // sum_{k > 4} 0.5^{k-1} = 0.5^3
    CHECK(d.tail()->neglected_intensity == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(d.tail()->neglected_variance == doctest::Approx(0.125 / 4.0).epsilon(1e-12));
    REQUIRE(d.summability().induced_drift.size() == 4);
    CHECK(d.summability().induced_drift[0] == doctest::Approx(0.5));
}

TEST_CASE("cumulant values") {
    const CumulantModel w(build_driver({LevyComponent::wiener(4.0)}, 1.0, 1.5));
    CHECK(w.cumulant(one(0.0)) == 0.0);
    CHECK(w.cumulant(one(0.5)) == doctest::Approx(0.5).epsilon(1e-15));

    // compensated: -log(1 - 1/2) - 1/2
    const CumulantModel g(gamma12());
    CHECK(g.cumulant(one(0.0)) == 0.0);
    CHECK(g.cumulant(one(1.0)) == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-14));
    CHECK(std::abs(g.cumulant(one(1.0)) - 0.193147) < 1e-6);

    CHECK_THROWS_AS(g.cumulant(one(1.01)), DomainError);
    CHECK_FALSE(g.in_domain(one(1.01)));
    CHECK(g.in_domain(one(-1.0)));
}

TEST_CASE("cumulant gradient and hessian") {
    const CumulantModel g(gamma12());
    CHECK(g.grad(one(0.0))[0] == 0.0);
    CHECK(g.grad(one(1.0))[0] == doctest::Approx(0.5).epsilon(1e-14));
    // against a centered difference of the cumulant
    const double h = 1e-5;
    const double fd = (g.cumulant(one(1.0 - 0.3 + h)) - g.cumulant(one(1.0 - 0.3 - h))) / (2 * h);
    CHECK(std::abs(fd - g.grad(one(0.7))[0]) < 1e-8);
    CHECK(g.grad(one(-0.1))[0] == doctest::Approx(1.0 / 2.1 - 0.5).epsilon(1e-14));

    const CumulantModel w(build_driver({LevyComponent::wiener(1.0)}, 1.0, 1.5));
    CHECK(w.grad(one(0.3))[0] == doctest::Approx(0.3).epsilon(1e-15));
    const std::vector<double> e1{1.0};
    CHECK(w.hess(one(0.7), e1, e1) == doctest::Approx(1.0));
    // D^2 psi(0)(e1, e1) = int x^2 m = c / alpha^2
    CHECK(g.hess(one(0.0), e1, e1) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("additivity over independent components") {
    const LevyDriver d = build_driver(
        {LevyComponent::wiener(1.0), LevyComponent::gamma(1.0, 2.0), LevyComponent::compound_poisson(1.0, 0.5)}, 1.0,
        1.5);
    const CumulantModel cm(d);
    const std::vector<double> z{0.3, -0.4, 0.5};
    double s = 0.0;
    for (std::size_t k = 0; k < 3; ++k) s += cm.component_cumulant(k, z[k]);
    CHECK(cm.cumulant(z) == doctest::Approx(s).epsilon(1e-15));
    const auto diag = cm.hess_diagonal(z);
    CHECK(diag[2] == doctest::Approx(cm.component_hess(2, 0.5)));

    const Covariance q = covariance(d);
    CHECK(q.Q(0, 0) == doctest::Approx(1.0));
    CHECK(q.Q(1, 1) == doctest::Approx(0.25));
    CHECK(q.Q(2, 2) == doctest::Approx(0.25));
    CHECK(q.Q(0, 1) == 0.0);
    CHECK(q.trace == doctest::Approx(1.5));
}

TEST_CASE("compound Poisson quadrature matches the closed form") {
    const LevyDriver d = build_driver({LevyComponent::compound_poisson(2.0, 0.7)}, 1.0, 1.5);
    const CumulantModel cf(d, EvaluationMode::closed_form), qd(d, EvaluationMode::quadrature);
    for (double z : {-1.0, -0.3, 0.2, 0.9}) {
        CHECK(qd.cumulant(one(z)) == doctest::Approx(cf.cumulant(one(z))).epsilon(1e-9));
        CHECK(qd.grad(one(z))[0] == doctest::Approx(cf.grad(one(z))[0]).epsilon(1e-9));
        CHECK(qd.component_hess(0, z) == doctest::Approx(cf.component_hess(0, z)).epsilon(1e-9));
    }
    CHECK(cf.cumulant(one(0.9)) == doctest::Approx(2.0 * (std::exp(0.49 * 0.81 / 2.0) - 1.0)).epsilon(1e-14));
}

TEST_CASE("moment factor") {
    const LevyDriver g11 = build_driver({LevyComponent::gamma(1.0, 1.0)}, 0.5, 1.5);
    CHECK(moment_mp(g11, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(moment_mp(g11, 4.0) == doctest::Approx(7.0).epsilon(1e-14));
    CHECK(moment_mp(build_driver({LevyComponent::wiener(1.0)}, 1.0, 1.5), 2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(moment_mp(g11, 6.0), CapabilityError);
}

TEST_CASE("increments: mean, variance and exponential moments") {
    const std::size_t n = 1000000;
    const double dt = 0.25;
    for (const LevyDriver& d :
         {build_driver({LevyComponent::wiener(2.0)}, 1.0, 1.5), gamma12(),
          build_driver({LevyComponent::compound_poisson(1.0, 1.0)}, 1.0, 1.5)}) {
        CAPTURE(to_string(d.component(0).kind));
        const CumulantModel cm(d);
        std::vector<double> x(n), sq(n), ex(n);
        const double zeta = 0.5;
        for (std::size_t i = 0; i < n; ++i) {
            CounterRng rng(5, i, 0);
            x[i] = sample_increment(d, dt, rng)[0];
            sq[i] = x[i] * x[i];
            ex[i] = std::exp(zeta * x[i]);
        }
        const McEstimate m = mc_estimate(x), v = mc_estimate(sq), e = mc_estimate(ex);
        CHECK(std::abs(m.mean) < 3.0 * m.standard_error);
        CHECK(v.mean == doctest::Approx(covariance(d).Q(0, 0) * dt).epsilon(0.01));
        CHECK(std::abs(e.mean - std::exp(cm.cumulant(one(zeta)) * dt)) < 3.0 * e.standard_error);
    }
}

TEST_CASE("noise records coarsen by summation") {
    const LevyDriver d = build_driver({LevyComponent::wiener(1.0), LevyComponent::gamma(1.0, 2.0)}, 1.0, 1.5);
    const NoiseSource fine(d, 17, 0.125);
    const NoiseSource coarse = fine.coarsened(4);
    CHECK(coarse.dt() == 0.5);
    for (std::size_t p : {0u, 3u})
        for (std::size_t j : {0u, 1u, 5u}) {
            const auto c = coarse.increment(p, j);
            std::vector<double> s(2, 0.0);
            for (std::size_t q = 0; q < 4; ++q) {
                const auto f = fine.increment(p, 4 * j + q);
                s[0] += f[0];
                s[1] += f[1];
            }
            CHECK(c[0] == doctest::Approx(s[0]).epsilon(1e-15));
            CHECK(c[1] == doctest::Approx(s[1]).epsilon(1e-15));
        }
    // pure function of (seed, path, step)
    CHECK(NoiseSource(d, 17, 0.125).increment(2, 9) == fine.increment(2, 9));
    CHECK(NoiseSource(d, 18, 0.125).increment(2, 9) != fine.increment(2, 9));
}
