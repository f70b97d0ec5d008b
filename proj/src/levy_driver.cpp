#include "hjm/levy_driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace hjm {

const char* to_string(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::wiener: return "wiener";
        case ComponentKind::gamma: return "gamma";
        case ComponentKind::compound_poisson: return "compound_poisson";
    }
    return "unknown";
}

LevyComponent LevyComponent::wiener(double variance) {
    LevyComponent c;
    c.kind = ComponentKind::wiener;
    c.variance = variance;
    return c;
}

LevyComponent LevyComponent::gamma(double c_, double rate_) {
    LevyComponent c;
    c.kind = ComponentKind::gamma;
    c.c = c_;
    c.rate = rate_;
    return c;
}

LevyComponent LevyComponent::compound_poisson(double intensity_, double jump_std_) {
    LevyComponent c;
    c.kind = ComponentKind::compound_poisson;
    c.intensity = intensity_;
    c.jump_std = jump_std_;
    return c;
}

double LevyComponent::gaussian_variance() const { return kind == ComponentKind::wiener ? variance : 0.0; }

double LevyComponent::levy_moment(double q) const {
    switch (kind) {
        case ComponentKind::wiener: return 0.0;
        case ComponentKind::gamma: return c * std::tgamma(q) / std::pow(rate, q);
        case ComponentKind::compound_poisson:
            // E|N(0, s^2)|^q = s^q 2^{q/2} Gamma((q+1)/2) / sqrt(pi)
            return intensity * std::pow(jump_std, q) * std::pow(2.0, 0.5 * q) * std::tgamma(0.5 * (q + 1.0)) /
                   std::sqrt(std::numbers::pi);
    }
    return 0.0;
}

double LevyComponent::small_jump_mass() const {
    switch (kind) {
        case ComponentKind::wiener: return 0.0;
        case ComponentKind::gamma: {
            const double a = rate;
            const double inner = (1.0 - std::exp(-a) * (1.0 + a)) / (a * a);
            const double outer = -std::expint(-a);  // E_1(a)
            return c * (inner + outer);
        }
        case ComponentKind::compound_poisson: {
            const double a = 1.0 / jump_std;
            const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
            const double inner = jump_std * jump_std * (std::erf(a / std::numbers::sqrt2) - 2.0 * a * pdf);
            return intensity * (inner + std::erfc(a / std::numbers::sqrt2));
        }
    }
    return 0.0;
}

double LevyComponent::variance_rate() const { return gaussian_variance() + levy_moment(2.0); }

double LevyComponent::triplet_drift() const { return kind == ComponentKind::gamma ? c / rate : 0.0; }

double LevyComponent::compensator() const { return kind == ComponentKind::gamma ? c / rate : 0.0; }

namespace {

void validate_component(const LevyComponent& comp, std::size_t k) {
    auto fail = [k](const std::string& msg) {
        throw std::invalid_argument("driver component " + std::to_string(k) + ": " + msg);
    };
    switch (comp.kind) {
        case ComponentKind::wiener:
            if (!(comp.variance >= 0.0) || !std::isfinite(comp.variance)) fail("wiener variance must be >= 0");
            break;
        case ComponentKind::gamma:
            if (!(comp.c > 0.0) || !(comp.rate > 0.0)) fail("gamma needs c > 0 and alpha > 0");
            break;
        case ComponentKind::compound_poisson:
            if (!(comp.intensity > 0.0) || !(comp.jump_std > 0.0))
                fail("compound_poisson needs intensity > 0 and jump_std > 0");
            break;
    }
}

void validate_driver_params(double r_ball, double delta, double p_max) {
    if (!(r_ball > 0.0)) throw std::invalid_argument("build_driver: r_ball must be positive");
    if (!(delta > 1.0)) throw std::invalid_argument("build_driver: delta must exceed 1");
    if (!(p_max >= 2.0)) throw std::invalid_argument("build_driver: p_max must be at least 2");
}

SummabilityReport summability_of(const std::vector<LevyComponent>& comps) {
    SummabilityReport rep;
    double b2 = 0.0, r2 = 0.0, sj = 0.0;
    for (const auto& c : comps) {
        const double b = c.triplet_drift();
        b2 += b * b;
        r2 += c.gaussian_variance() * c.gaussian_variance();
        sj += c.small_jump_mass();
        rep.induced_drift.push_back(b);
    }
    rep.drift_l2 = std::sqrt(b2);
    rep.gaussian_l2 = std::sqrt(r2);
    rep.small_jump_total = sj;
    if (!std::isfinite(rep.drift_l2)) throw std::invalid_argument("summability violated: b not in l2");
    if (!std::isfinite(rep.gaussian_l2)) throw std::invalid_argument("summability violated: r not in l2");
    if (!std::isfinite(sj))
        throw std::invalid_argument("summability violated: sum_k int (1 ^ x^2) m^k(dx) diverges");
    return rep;
}

void check_exponential_radius(const std::vector<LevyComponent>& comps, double r_ball, double delta) {
    double min_rate = std::numeric_limits<double>::infinity();
    for (const auto& c : comps)
        if (c.kind == ComponentKind::gamma) min_rate = std::min(min_rate, c.rate);
    if (delta * r_ball >= min_rate) {
        std::ostringstream msg;
        msg << "exponential integrability E exp|<zeta, M(1)>| < C on B_{delta r} fails: delta * r_ball = "
            << delta * r_ball << " >= min gamma rate " << min_rate;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

LevyDriver build_driver(std::vector<LevyComponent> components, double r_ball, double delta, double p_max) {
    if (components.empty()) throw std::invalid_argument("build_driver: component list is empty");
    for (std::size_t k = 0; k < components.size(); ++k) validate_component(components[k], k);
    validate_driver_params(r_ball, delta, p_max);
    LevyDriver d;
    check_exponential_radius(components, r_ball, delta);
    d.summability_ = summability_of(components);
    d.components_ = std::move(components);
    d.r_ball_ = r_ball;
    d.delta_ = delta;
    d.p_max_ = p_max;
    return d;
}

LevyDriver build_gamma_geometric(const GammaGeometricFamily& family, double r_ball, double delta, double p_max) {
    if (family.d_trunc < 1) throw std::invalid_argument("gamma_geometric: d_trunc must be >= 1");
    if (!(family.c0 > 0.0) || !(family.alpha > 0.0))
        throw std::invalid_argument("gamma_geometric: c0 and alpha must be positive");
    if (!(family.ratio > 0.0) || !(family.ratio < 1.0))
        throw std::invalid_argument(
            "summability violated: gamma_geometric needs 0 < ratio < 1 so that c^k lies in l1 and l2");
    std::vector<LevyComponent> comps;
    double c = family.c0;
    for (std::size_t k = 0; k < family.d_trunc; ++k) {
        comps.push_back(LevyComponent::gamma(c, family.alpha));
        c *= family.ratio;
    }
    LevyDriver d = build_driver(std::move(comps), r_ball, delta, p_max);
    const double tail_c = family.c0 * std::pow(family.ratio, static_cast<double>(family.d_trunc)) / (1.0 - family.ratio);
    d.tail_ = TruncationTail{"gamma_geometric", tail_c / (family.alpha * family.alpha), tail_c};
    return d;
}

// --- Cumulant calculus ---

CumulantModel::CumulantModel(LevyDriver driver, EvaluationMode mode) : driver_(std::move(driver)), mode_(mode) {}

bool CumulantModel::in_domain(std::span<const double> zeta) const {
    double s = 0.0;
    for (double z : zeta) s += z * z;
    const double r = driver_.r_ball();
    return s <= r * r * (1.0 + 1e-12);
}

void CumulantModel::check_domain(std::span<const double> zeta) const {
    if (zeta.size() != driver_.dimension())
        throw std::invalid_argument("cumulant: zeta dimension does not match driver");
    if (!in_domain(zeta)) {
        double s = 0.0;
        for (double z : zeta) s += z * z;
        std::ostringstream msg;
        msg << "cumulant evaluated outside B_r: |zeta| = " << std::sqrt(s) << " > r_ball = " << driver_.r_ball();
        throw DomainError(msg.str());
    }
}

// order 0: int (e^{zx} - 1 - zx) m(dx); order 1: int x (e^{zx} - 1) m(dx); order 2: int x^2 e^{zx} m(dx).
double CumulantModel::cpp_jump_integral(const LevyComponent& c, double z, int order) const {
    const double s = c.jump_std;
    // e^{zx} N(0, s^2) has its mass around x = z s^2
    const double centre = z * s * s;
    const double lo = centre - 14.0 * s, hi = centre + 14.0 * s;
    const int panels = 4000;
    const double h = (hi - lo) / panels;
    auto integrand = [&](double x) {
        const double dens = std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi));
        switch (order) {
            case 0: return (std::expm1(z * x) - z * x) * dens;
            case 1: return x * std::expm1(z * x) * dens;
            default: return x * x * std::exp(z * x) * dens;
        }
    };
    double sum = integrand(lo) + integrand(hi);
    for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(lo + i * h);
    return c.intensity * sum * h / 3.0;
}

double CumulantModel::component_cumulant(std::size_t k, double z) const {
    const LevyComponent& c = driver_.component(k);
    switch (c.kind) {
        case ComponentKind::wiener: return 0.5 * c.variance * z * z;
        case ComponentKind::gamma:
            if (!(z < c.rate)) throw DomainError("gamma cumulant needs zeta^k < alpha^k");
            return -c.c * std::log1p(-z / c.rate) - c.c * z / c.rate;
        case ComponentKind::compound_poisson:
            if (mode_ == EvaluationMode::quadrature) return cpp_jump_integral(c, z, 0);
            return c.intensity * std::expm1(0.5 * c.jump_std * c.jump_std * z * z);
    }
    return 0.0;
}

double CumulantModel::component_grad(std::size_t k, double z) const {
    const LevyComponent& c = driver_.component(k);
    switch (c.kind) {
        case ComponentKind::wiener: return c.variance * z;
        case ComponentKind::gamma:
            if (!(z < c.rate)) throw DomainError("gamma cumulant needs zeta^k < alpha^k");
            // c/(alpha - z) - c/alpha, written to avoid cancellation near z = 0
            return c.c * z / (c.rate * (c.rate - z));
        case ComponentKind::compound_poisson: {
            if (mode_ == EvaluationMode::quadrature) return cpp_jump_integral(c, z, 1);
            const double s2 = c.jump_std * c.jump_std;
            return c.intensity * s2 * z * std::exp(0.5 * s2 * z * z);
        }
    }
    return 0.0;
}

double CumulantModel::component_hess(std::size_t k, double z) const {
    const LevyComponent& c = driver_.component(k);
    switch (c.kind) {
        case ComponentKind::wiener: return c.variance;
        case ComponentKind::gamma: {
            if (!(z < c.rate)) throw DomainError("gamma cumulant needs zeta^k < alpha^k");
            const double d = c.rate - z;
            return c.c / (d * d);
        }
        case ComponentKind::compound_poisson: {
            if (mode_ == EvaluationMode::quadrature) return cpp_jump_integral(c, z, 2);
            const double s2 = c.jump_std * c.jump_std;
            return c.intensity * s2 * (1.0 + s2 * z * z) * std::exp(0.5 * s2 * z * z);
        }
    }
    return 0.0;
}

double CumulantModel::cumulant(std::span<const double> zeta) const {
    check_domain(zeta);
    double s = 0.0;
    for (std::size_t k = 0; k < zeta.size(); ++k) s += component_cumulant(k, zeta[k]);
    return s;
}

void CumulantModel::grad_into(std::span<const double> zeta, std::span<double> out) const {
    check_domain(zeta);
    for (std::size_t k = 0; k < zeta.size(); ++k) out[k] = component_grad(k, zeta[k]);
}

std::vector<double> CumulantModel::grad(std::span<const double> zeta) const {
    std::vector<double> g(zeta.size());
    grad_into(zeta, g);
    return g;
}

double CumulantModel::hess(std::span<const double> zeta, std::span<const double> phi,
                           std::span<const double> eta) const {
    check_domain(zeta);
    if (phi.size() != zeta.size() || eta.size() != zeta.size())
        throw std::invalid_argument("hess: direction dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < zeta.size(); ++k) s += component_hess(k, zeta[k]) * phi[k] * eta[k];
    return s;
}

std::vector<double> CumulantModel::hess_diagonal(std::span<const double> zeta) const {
    check_domain(zeta);
    std::vector<double> h(zeta.size());
    for (std::size_t k = 0; k < zeta.size(); ++k) h[k] = component_hess(k, zeta[k]);
    return h;
}

Covariance covariance(const LevyDriver& driver) {
    const std::size_t d = driver.dimension();
    Covariance cov;
    cov.Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
        const double q = driver.component(k).variance_rate();
        cov.Q(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = q;
        cov.trace += q;
    }
    return cov;
}

double moment_mp(const LevyDriver& driver, double p) {
    if (p < 2.0) throw std::invalid_argument("moment_mp: order must be >= 2");
    if (p > driver.p_max()) {
        std::ostringstream msg;
        msg << "moment_mp: order " << p << " exceeds driver p_max " << driver.p_max();
        throw CapabilityError(msg.str());
    }
    double trace_r = 0.0, jump_p = 0.0, jump_2 = 0.0;
    for (const auto& c : driver.components()) {
        trace_r += c.gaussian_variance();
        jump_p += c.levy_moment(p);
        jump_2 += c.levy_moment(2.0);
    }
    return std::pow(trace_r, 0.5 * p) + jump_p + std::pow(jump_2, 0.5 * p);
}

void sample_increment(const LevyDriver& driver, double dt, CounterRng& rng, std::span<double> out) {
    for (std::size_t k = 0; k < driver.dimension(); ++k) {
        const LevyComponent& c = driver.component(k);
        switch (c.kind) {
            case ComponentKind::wiener: {
                std::normal_distribution<double> z(0.0, 1.0);
                out[k] = std::sqrt(c.variance * dt) * z(rng);
                break;
            }
            case ComponentKind::gamma: {
                std::gamma_distribution<double> g(c.c * dt, 1.0 / c.rate);
                out[k] = g(rng) - c.c * dt / c.rate;
                break;
            }
            case ComponentKind::compound_poisson: {
                std::poisson_distribution<long> jumps(c.intensity * dt);
                const long n = jumps(rng);
                if (n == 0) {
                    out[k] = 0.0;
                } else {
                    std::normal_distribution<double> z(0.0, 1.0);
                    out[k] = c.jump_std * std::sqrt(static_cast<double>(n)) * z(rng);
                }
                break;
            }
        }
    }
}

std::vector<double> sample_increment(const LevyDriver& driver, double dt, CounterRng& rng) {
    std::vector<double> out(driver.dimension());
    sample_increment(driver, dt, rng, out);
    return out;
}

NoiseSource::NoiseSource(LevyDriver driver, std::uint64_t seed, double fine_dt, std::size_t substeps)
    : driver_(std::move(driver)), seed_(seed), fine_dt_(fine_dt), substeps_(substeps) {
    if (!(fine_dt_ > 0.0)) throw std::invalid_argument("NoiseSource: dt must be positive");
    if (substeps_ < 1) throw std::invalid_argument("NoiseSource: substeps must be >= 1");
}

void NoiseSource::increment(std::size_t path, std::size_t step, std::span<double> out) const {
    const std::size_t d = driver_.dimension();
    if (substeps_ == 1) {
        CounterRng rng(seed_, path, step);
        sample_increment(driver_, fine_dt_, rng, out);
        return;
    }
    double buf[16];
    std::vector<double> heap;
    std::span<double> tmp;
    if (d <= 16) {
        tmp = std::span<double>(buf, d);
    } else {
        heap.resize(d);
        tmp = heap;
    }
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
    for (std::size_t s = 0; s < substeps_; ++s) {
        CounterRng rng(seed_, path, step * substeps_ + s);
        sample_increment(driver_, fine_dt_, rng, tmp);
        for (std::size_t k = 0; k < d; ++k) out[k] += tmp[k];
    }
}

std::vector<double> NoiseSource::increment(std::size_t path, std::size_t step) const {
    std::vector<double> out(driver_.dimension());
    increment(path, step, out);
    return out;
}

NoiseSource NoiseSource::coarsened(std::size_t factor) const {
    if (factor < 1) throw std::invalid_argument("NoiseSource::coarsened: factor must be >= 1");
    return NoiseSource(driver_, seed_, fine_dt_, substeps_ * factor);
}

}  // namespace hjm
