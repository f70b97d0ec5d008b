#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hjm/hjm_model.hpp"
#include "hjm/levy_driver.hpp"
#include "hjm/mild_solver.hpp"
#include "hjm/weighted_space.hpp"

namespace hjm {

enum class CheckKind { identity, inequality };

/// identity:   pass iff |lhs - rhs| <= tol (1 + |rhs|) + 3 se
/// inequality: pass iff lhs <= rhs (1 + tol) + 3 se
struct CheckReport {
    std::string name;
    CheckKind kind = CheckKind::inequality;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    std::size_t n_samples = 0;
    double standard_error = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string detail;
};

CheckReport identity_check(std::string name, double lhs, double rhs, double se, double tol, std::size_t n,
                           std::string detail = {});
CheckReport inequality_check(std::string name, double lhs, double rhs, double se, double tol, std::size_t n,
                             std::string detail = {});
/// Report whose pass flag is the negation of `target`'s: used by negative controls.
CheckReport negated(std::string name, const CheckReport& target);

// --- Cumulant calculus ---

/// Closed-form Dpsi and D^2psi against central differences (step 1e-5) at
/// n_points uniform points of the ball; lhs is the worst relative error.
/// The detail records empirical Lipschitz constants of D^2psi on the ball
/// and on the half ball.
CheckReport verify_cumulant_derivatives(const CumulantModel& cm, std::size_t n_points, std::uint64_t seed,
                                        double tol = 1e-6);

/// exp(psi(zeta)) against the sample mean of exp<zeta, M(1)> over n_draws
/// draws shared by all n_zeta points; lhs is the worst |z-score|, rhs 3.
CheckReport verify_cumulant_laplace(const CumulantModel& cm, std::size_t n_zeta, std::size_t n_draws,
                                    std::uint64_t seed);

// --- Stochastic integrals ---

enum class IntegrandTiming { left, right };

/// E|sum_j F_j dM_j|_H^2 against sum_j dt E|F_j|_Q^2 for the random integrand
/// F_j = phi_j (1 + M^1(s)), with s = t_j (left, predictable) or t_{j+1} (right).
/// The right side is the isometry prediction for the integrand as evaluated.
CheckReport verify_isometry(const LevyDriver& driver, const WeightGrid& grid, const std::vector<VectorCurve>& phi,
                            double dt, std::size_t n_paths, std::uint64_t seed,
                            IntegrandTiming timing = IntegrandTiming::left, double tol = 0.0);

/// Maximal-inequality estimates for F(t) = c(t) phi, c(t) = 1 + cos(pi t) / 2,
/// on horizons that are prefixes of one simulation.
struct MaximalCell {
    std::string driver;
    double p = 2.0;
    double T = 1.0;
    double lhs_bj = 0.0, se_bj = 0.0;      // E sup |int F dM|_H^p
    double rhs_bj = 0.0;                   // m_p int |F|_op^p, H operator norm
    double lhs_conv = 0.0, se_conv = 0.0;  // E sup |int S(t-s) F dM|_*^p
    double rhs_conv = 0.0;                 // m_p int |F|_op^p, * operator norm
    double lhs_mart_star = 0.0;            // E sup |int F dM|_*^p
    std::size_t n_paths = 0;
    double n_hat_bj() const { return lhs_bj / rhs_bj; }
    double n_hat_conv() const { return lhs_conv / rhs_conv; }
    double se_hat_bj() const { return se_bj / rhs_bj; }
    double se_hat_conv() const { return se_conv / rhs_conv; }
};

std::vector<MaximalCell> maximal_inequality_table(const std::string& label, const LevyDriver& driver,
                                                  const WeightGrid& grid, const VectorCurve& phi,
                                                  const std::vector<double>& horizons, const std::vector<double>& ps,
                                                  double dt, std::size_t n_paths, std::uint64_t seed);

/// Single-cell reports: finite implied constant, plus the Doob bound at p = 2.
CheckReport verify_bichteler_jacod(const MaximalCell& cell, double doob_eps = 0.1);
/// Finite implied constant and convolution sup <= 2 x martingale sup in |.|_*.
CheckReport verify_convolution_inequality(const MaximalCell& cell);
/// Per (p, T): max/min implied constant across drivers < factor. The ratio for
/// a single integrand need not grow with T (only its sup over integrands
/// does), so no monotonicity is asserted.
std::vector<CheckReport> verify_maximal_stability(const std::vector<MaximalCell>& table, double factor = 3.0);

// --- Model layer ---

/// Slope of E D(t) in t, D(t) = exp(-int_0^t u(s,0) ds) P(t, T_mat - t), per maturity.
/// The short-rate integral accrues exp(-int_0^dt u(t_j, x) dx) per step, the
/// quadrature under which the discrete scheme is an exact martingale for
/// node-aligned steps. Pass needs the mean per-path OLS slope and the
/// endpoint difference both within 3 s.e. of zero.
std::vector<CheckReport> verify_martingale_bonds(const HjmModel& model, const Curve& u0,
                                                 const std::vector<double>& maturities, const SolverConfig& cfg);

/// Pure-Wiener drift against sigma R int sigma on n_specs random volatilities.
CheckReport verify_gaussian_reduction(const WeightGrid& grid, std::size_t n_specs, std::uint64_t seed,
                                      double tol = 1e-10);

/// Hilbert-Schmidt growth bound on n_curves random curves of growing norm.
CheckReport verify_hs_growth(const HjmModel& model, std::size_t n_curves, std::uint64_t seed);

CheckReport verify_hypotheses(const HjmModel& model, std::size_t sample_budget, std::uint64_t seed);

/// max_R n(R) < factor * n(R_min) for the normalized quotients of B and g.
std::vector<CheckReport> verify_lipschitz(const HjmModel& model, const std::vector<double>& radii,
                                          std::size_t n_pairs, std::uint64_t seed, double factor = 3.0);

/// | |phi|_K |_H <= |phi| + eps_grid on random K-valued curves, with eps_grid
/// measured at n_points and 2 n_points - 1 nodes.
CheckReport verify_modulus_norm(double x_max, std::size_t n_points, double beta, std::size_t dimension,
                                std::size_t n_curves, std::uint64_t seed);

/// Embedding ratios below their explicit constants and changing by less than
/// `rel_change` per curve under node doubling.
CheckReport verify_embeddings(double x_max, std::size_t n_points, double beta, std::size_t n_curves,
                              std::uint64_t seed, double rel_change = 0.01);

// --- Solver ---

/// With sigma = 0 both solvers reproduce shift(u0, t_j) bitwise.
CheckReport verify_zero_transport(const WeightGrid& grid, const Curve& u0, const SolverConfig& cfg);

/// Constant sigma0, unit Wiener driver: sup-time H error of the Picard
/// solution against the closed form at each step count; lhs and rhs are the
/// extreme error ratios under halving, which must lie in [lo, hi].
CheckReport verify_additive_gaussian(const WeightGrid& grid, double sigma0, double T,
                                     const std::vector<std::size_t>& step_counts, std::size_t n_paths,
                                     std::uint64_t seed, double lo = 1.8, double hi = 2.2);

/// sup_t (E|u_picard - u_euler|_H^2)^{1/2} on common noise at n, 2n, 4n ...
/// steps; error ratios under halving must lie in [lo, hi].
CheckReport verify_scheme_agreement(const HjmModel& model, const Curve& u0, const SolverConfig& cfg,
                                    std::size_t levels = 3, double lo = 1.5, double hi = 2.5);

/// Residuals strictly decreasing after sweep 1, terminal ratio < 1, converged.
CheckReport verify_picard_contraction(const HjmModel& model, const Curve& u0, const SolverConfig& cfg);

/// Max ratio over n_dirs perturbation directions at step counts n and 2n:
/// bounded by 2 sqrt(2 + 1/beta) and changing by less than rel_change.
CheckReport verify_initial_datum_lipschitz(const HjmModel& model, const Curve& u0, const SolverConfig& cfg,
                                           std::size_t n_dirs, std::uint64_t seed, double rel_change = 0.1);

}  // namespace hjm
