#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hjm/levy_driver.hpp"
#include "hjm/volatility.hpp"
#include "hjm/weighted_space.hpp"

namespace hjm {

/// The running integral of sigma left the cumulant ball; consumed by the
/// solvers as a localization signal.
class BallViolation : public DomainError {
   public:
    using DomainError::DomainError;
};

/// du = [Au + f(t,u)] dt + B(t,u) dM on the grid, with
/// [B(t,u) phi](x) = <sigma(t,x,u(x)), phi> and
/// f(t,x) = drift_sign * <sigma(t,x,u(x)), Dpsi(-int_0^x sigma(t,y,u(y)) dy)>.
///
/// drift_sign = -1 makes discounted bonds martingales for the log-Laplace
/// cumulant; +1 is kept runnable as a negative control.
class HjmModel {
   public:
    HjmModel(VolatilitySpec vol, LevyDriver driver, WeightGrid grid, int drift_sign = -1,
             EvaluationMode mode = EvaluationMode::closed_form);

    const VolatilitySpec& vol() const { return vol_; }
    const LevyDriver& driver() const { return cumulant_.driver(); }
    const CumulantModel& cumulant() const { return cumulant_; }
    const WeightGrid& grid() const { return grid_; }
    int drift_sign() const { return drift_sign_; }
    std::size_t dimension() const { return vol_.dimension(); }

    /// Same model with the other drift sign.
    HjmModel with_drift_sign(int sign) const;

   private:
    VolatilitySpec vol_;
    CumulantModel cumulant_;
    WeightGrid grid_;
    int drift_sign_;
};

/// Scratch buffers for the per-curve kernels; one per worker.
struct ModelWorkspace {
    explicit ModelWorkspace(const HjmModel& model);
    std::vector<double> sigma;    // d * n, component-major
    std::vector<double> running;  // d * n, int_0^x sigma
    std::vector<double> zeta;     // d
    std::vector<double> grad;     // d
};

// --- Kernels on raw samples (hot path of the solvers) ---

/// sigma^k(t, x_i, u_i) into ws.sigma.
void evaluate_sigma(const HjmModel& model, double t, std::span<const double> u, ModelWorkspace& ws);
/// Drift from ws.sigma (already evaluated); false on ball violation, leaving out unspecified.
bool drift_from_sigma(const HjmModel& model, ModelWorkspace& ws, std::span<double> out);
/// out += sum_k sigma^k * dM^k, using ws.sigma.
void add_noise_from_sigma(const HjmModel& model, const ModelWorkspace& ws, std::span<const double> dM,
                          std::span<double> out);

// --- Operations ---

Curve apply_B(const HjmModel& model, double t, const Curve& u, std::span<const double> phi);

/// Hilbert-Schmidt norm in the convention sum_k int (d/dx sigma^k(t,x,u(x)))^2 alpha dx.
double hs_norm_B(const HjmModel& model, double t, const Curve& u);

/// Right side of the Hilbert-Schmidt growth bound with explicit constants:
///   4 |sigma(t,.,0)|^2 + (4 C_inf^2 |beta|^2_{alpha,l2} + 2 |gamma|^2_{l2}) |u|_H^2,
/// C_inf^2 = 1 + int_0^inf 1/alpha.
double hs_growth_bound_sq(const HjmModel& model, double t, const Curve& u);

/// Throws BallViolation if the running integral leaves B_{r_ball}.
Curve hjm_drift(const HjmModel& model, double t, const Curve& u);

/// Unsigned g(nu)(x) = <nu(x), Dpsi(-int_0^x nu)> for a K-valued curve nu.
Curve drift_functional(const HjmModel& model, const VectorCurve& nu);

/// x -> sigma(t, x, u(x)) as a K-valued curve.
VectorCurve sigma_curve(const HjmModel& model, double t, const Curve& u);

struct HypothesisEntry {
    std::string name;
    bool pass = true;
    double worst_margin = 0.0;  // max of (lhs - bound); <= 0 when satisfied
    std::size_t samples = 0;
    std::vector<double> margin_by_range;  // worst margin per sampling range, u in [-2^m, 2^m]
    std::string note;
};

struct HypothesisReport {
    std::vector<HypothesisEntry> entries;
    bool all_pass() const;
    const HypothesisEntry& at(const std::string& name) const;
};

/// Sampled audit of: smoothness, the Lipschitz bound on sigma_x, the bound on
/// sigma_u and sigma_uu, |sigma(t,.,0)| finite, the ball budget, and driver
/// moments up to p_max. A sampled audit can only falsify these.
HypothesisReport check_hypotheses(const HjmModel& model, std::size_t sample_budget, std::uint64_t seed = 7,
                                  double t_max = 1.0);

enum class LipschitzTarget { B, g };

struct LipschitzEstimate {
    double constant = 0.0;  // max quotient divided by (1+R) for B, (1+R^2) for g
    double raw = 0.0;       // max quotient
    std::size_t pairs_used = 0;
};

/// Empirical local Lipschitz quotient over sampled pairs in B_R(H).
LipschitzEstimate lipschitz_estimate(const HjmModel& model, LipschitzTarget which, double R, std::size_t n_pairs,
                                     std::uint64_t seed = 11, double t = 0.0);

/// | x -> |phi(x)|_K |_H and |phi|, whose ordering is checked empirically.
struct NormComparison {
    double modulus_norm;
    double frak_norm;
};
NormComparison compare_modulus_norm(const VectorCurve& phi, const WeightGrid& grid);

}  // namespace hjm
