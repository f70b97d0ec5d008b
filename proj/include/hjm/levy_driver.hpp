#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hjm/rng.hpp"

namespace hjm {

/// Raised when a cumulant is evaluated outside its declared ball, or a
/// gamma component at zeta^k >= alpha^k.
class DomainError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

/// Raised when a quantity beyond the driver's declared moment order is requested.
class CapabilityError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

enum class ComponentKind { wiener, gamma, compound_poisson };

const char* to_string(ComponentKind kind);

/// One independent scalar Levy component of the driving martingale.
///
/// wiener:            variance rate r.
/// gamma:             Levy measure c x^{-1} e^{-rate x} dx on x > 0, simulated
///                    compensated (xi(t) - t c / rate) so the component is a
///                    mean-zero martingale.
/// compound_poisson:  intensity lambda, N(0, jump_std^2) jumps (already mean zero).
struct LevyComponent {
    ComponentKind kind = ComponentKind::wiener;
    double variance = 0.0;
    double c = 0.0;
    double rate = 0.0;
    double intensity = 0.0;
    double jump_std = 0.0;

    static LevyComponent wiener(double variance);
    static LevyComponent gamma(double c, double rate);
    static LevyComponent compound_poisson(double intensity, double jump_std);

    /// Gaussian variance r of the triplet.
    double gaussian_variance() const;
    /// int |x|^q m(dx) for the jump part.
    double levy_moment(double q) const;
    /// int (1 ^ x^2) m(dx).
    double small_jump_mass() const;
    /// E M(1)^2 = r + int x^2 m(dx).
    double variance_rate() const;
    /// Drift b of the raw (uncompensated) triplet; c / rate for gamma, 0 otherwise.
    double triplet_drift() const;
    /// Mean per unit time removed by compensation.
    double compensator() const;
};

/// Closed-form infinite family c^k = c0 * ratio^(k-1), alpha^k = alpha, truncated at d_trunc.
struct GammaGeometricFamily {
    double c0 = 1.0;
    double ratio = 0.5;
    double alpha = 2.0;
    std::size_t d_trunc = 1;
};

/// Quantities neglected by truncating an infinite family.
struct TruncationTail {
    std::string rule;
    double neglected_variance = 0.0;  // sum_{k > d} c^k / (alpha^k)^2
    double neglected_intensity = 0.0; // sum_{k > d} c^k
};

/// Summability bookkeeping checked at construction.
struct SummabilityReport {
    double drift_l2 = 0.0;           // |b|_{l2}
    double gaussian_l2 = 0.0;        // |r|_{l2}
    double small_jump_total = 0.0;   // sum_k int (1 ^ x^2) m^k
    std::vector<double> induced_drift;  // b^k of the raw triplet; removed by compensation
};

/// Driver M on K = R^d with independent components. Immutable after construction.
class LevyDriver {
   public:
    std::size_t dimension() const { return components_.size(); }
    const std::vector<LevyComponent>& components() const { return components_; }
    const LevyComponent& component(std::size_t k) const { return components_[k]; }
    double r_ball() const { return r_ball_; }
    double delta() const { return delta_; }
    double p_max() const { return p_max_; }
    const std::optional<TruncationTail>& tail() const { return tail_; }
    const SummabilityReport& summability() const { return summability_; }

   private:
    friend LevyDriver build_driver(std::vector<LevyComponent>, double, double, double);
    friend LevyDriver build_gamma_geometric(const GammaGeometricFamily&, double, double, double);

    std::vector<LevyComponent> components_;
    double r_ball_ = 0.0;
    double delta_ = 0.0;
    double p_max_ = 0.0;
    std::optional<TruncationTail> tail_;
    SummabilityReport summability_;
};

/// Validates parameters, summability and, for gamma components, the
/// exponential-integrability radius delta * r_ball < min_k alpha^k.
LevyDriver build_driver(std::vector<LevyComponent> components, double r_ball, double delta, double p_max = 4.0);
LevyDriver build_gamma_geometric(const GammaGeometricFamily& family, double r_ball, double delta,
                                 double p_max = 4.0);

enum class EvaluationMode { closed_form, quadrature };

/// psi(zeta) = log E exp<zeta, M(1)> and its first two derivatives on the
/// ball |zeta| <= r_ball. Components add by independence. In quadrature mode
/// the compound-Poisson jump integrals are computed numerically; wiener and
/// gamma stay closed form.
class CumulantModel {
   public:
    explicit CumulantModel(LevyDriver driver, EvaluationMode mode = EvaluationMode::closed_form);

    const LevyDriver& driver() const { return driver_; }
    EvaluationMode mode() const { return mode_; }

    double cumulant(std::span<const double> zeta) const;
    std::vector<double> grad(std::span<const double> zeta) const;
    void grad_into(std::span<const double> zeta, std::span<double> out) const;
    /// D^2 psi(zeta)(phi, eta).
    double hess(std::span<const double> zeta, std::span<const double> phi, std::span<const double> eta) const;
    /// Diagonal of D^2 psi(zeta) in the component basis.
    std::vector<double> hess_diagonal(std::span<const double> zeta) const;

    /// False iff zeta lies outside the closed ball of radius r_ball.
    bool in_domain(std::span<const double> zeta) const;

    // Per-component scalar calculus; zeta_k outside the component's domain throws.
    double component_cumulant(std::size_t k, double z) const;
    double component_grad(std::size_t k, double z) const;
    double component_hess(std::size_t k, double z) const;

   private:
    void check_domain(std::span<const double> zeta) const;
    double cpp_jump_integral(const LevyComponent& c, double z, int order) const;

    LevyDriver driver_;
    EvaluationMode mode_;
};

struct Covariance {
    Eigen::MatrixXd Q;
    double trace = 0.0;
};

/// <Qx, y> = E <M(1), x><M(1), y>; diagonal by independence.
Covariance covariance(const LevyDriver& driver);

/// Driver moment factor |R|_1^{p/2} + int |x|^p m(dx) + (int |x|^2 m(dx))^{p/2}.
double moment_mp(const LevyDriver& driver, double p);

/// One draw of M(t + dt) - M(t).
void sample_increment(const LevyDriver& driver, double dt, CounterRng& rng, std::span<double> out);
std::vector<double> sample_increment(const LevyDriver& driver, double dt, CounterRng& rng);

/// Deterministic noise record: the increment over coarse step j of path p is
/// the sum of `substeps` fine increments, each drawn from
/// CounterRng(seed, p, j * substeps + s). Coarsening a record by summing
/// fine increments therefore reuses the identical underlying noise.
class NoiseSource {
   public:
    NoiseSource(LevyDriver driver, std::uint64_t seed, double fine_dt, std::size_t substeps = 1);

    std::size_t dimension() const { return driver_.dimension(); }
    double dt() const { return fine_dt_ * static_cast<double>(substeps_); }
    double fine_dt() const { return fine_dt_; }
    std::size_t substeps() const { return substeps_; }
    std::uint64_t seed() const { return seed_; }
    const LevyDriver& driver() const { return driver_; }

    void increment(std::size_t path, std::size_t step, std::span<double> out) const;
    std::vector<double> increment(std::size_t path, std::size_t step) const;

    /// Same noise at `factor` times the step size.
    NoiseSource coarsened(std::size_t factor) const;

   private:
    LevyDriver driver_;
    std::uint64_t seed_;
    double fine_dt_;
    std::size_t substeps_;
};

}  // namespace hjm
