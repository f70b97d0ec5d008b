#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjm/hjm_model.hpp"
#include "hjm/levy_driver.hpp"
#include "hjm/stats.hpp"
#include "hjm/weighted_space.hpp"

namespace hjm {

enum class SolverMethod { picard, euler };

struct SolverConfig {
    double T = 1.0;
    std::size_t n_steps = 16;
    std::size_t n_paths = 1000;
    std::size_t n_picard = 20;
    double picard_tol = 1e-10;
    double R_local = 1e6;
    double p = 2.0;
    std::uint64_t seed = 1;
    SolverMethod method = SolverMethod::picard;

    double dt() const { return T / static_cast<double>(n_steps); }
    double time(std::size_t j) const { return static_cast<double>(j) * dt(); }
    std::size_t n_times() const { return n_steps + 1; }
    /// Throws std::invalid_argument naming the violated invariant.
    void validate(const LevyDriver& driver) const;
};

/// Picard stalled: residuals stopped decreasing before reaching picard_tol.
class NonConvergenceError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Sentinel exit index of a path that never left the localization ball.
inline constexpr std::size_t never_exited = std::numeric_limits<std::size_t>::max();

/// paths x time nodes x grid nodes. Path p is frozen from exit_index[p] on:
/// curve(p, j) == curve(p, exit_index[p]) for j >= exit_index[p].
struct SolutionEnsemble {
    std::size_t n_paths = 0;
    std::size_t n_times = 0;
    std::size_t n_nodes = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> values;
    std::vector<std::size_t> exit_index;
    std::vector<std::string> diagnostics;  // per path; empty unless exited on a non-finite value

    SolutionEnsemble() = default;
    SolutionEnsemble(std::size_t paths, std::size_t times, std::size_t nodes, double dt, std::uint64_t seed);

    std::span<const double> curve(std::size_t path, std::size_t j) const;
    std::span<double> curve(std::size_t path, std::size_t j);
    std::span<const double> path(std::size_t p) const;
    std::span<double> path(std::size_t p);
    Curve curve_copy(std::size_t path, std::size_t j) const;
    double exit_time(std::size_t p) const;
    std::size_t n_alive(std::size_t j) const;
    bool operator==(const SolutionEnsemble& other) const = default;
};

/// Read-only view of one finished path handed to observers.
struct PathView {
    std::size_t path;
    std::size_t n_times;
    std::size_t n_nodes;
    std::span<const double> values;  // n_times * n_nodes
    std::size_t exit_index;
    std::span<const double> curve(std::size_t j) const { return values.subspan(j * n_nodes, n_nodes); }
};

/// Called concurrently from worker threads, once per path; must only touch
/// per-path state.
using PathObserver = std::function<void(const PathView&)>;

/// Noise with step cfg.dt() and seed cfg.seed.
NoiseSource default_noise(const LevyDriver& driver, const SolverConfig& cfg);

/// sum_{j < t_index} shift(sum_k F_j^k dM_j^k, (t_index - j) dt); left-endpoint integrand.
Curve stochastic_convolution(const HjmModel& model, std::span<const VectorCurve> integrand,
                             std::span<const std::vector<double>> noise, double dt, std::size_t t_index);

/// u_{j+1} = shift(u_j, dt) + f(t_j, u_j) dt + B(t_j, u_j) dM_j, streamed path by path.
void euler_stream(const HjmModel& model, const Curve& u0, const SolverConfig& cfg, const NoiseSource& noise,
                  const PathObserver& observer);
SolutionEnsemble euler_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg);
SolutionEnsemble euler_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg,
                             const NoiseSource& noise);

struct PicardResult {
    SolutionEnsemble ensemble;
    std::size_t sweeps = 0;
    std::vector<double> residuals;  // sqrt(sup_t E|u^(m) - u^(m-1)|_H^2), m = 1..sweeps
    bool converged = false;
    /// residual[m] / residual[m-1] at the last sweep with a nonzero predecessor.
    double contraction_ratio() const;
};

/// Iterates u^(m+1)(t_n) = shift(u0, t_n) + sum_{j<n} shift(f(u^(m)_j) dt + B(u^(m)_j) dM_j, t_n - t_j)
/// from the pure-transport start, on one fixed noise record.
PicardResult picard_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg);
PicardResult picard_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg,
                          const NoiseSource& noise);

/// Per path and time |u(t_j)|_H, the input of both norm estimators.
struct PathNorms {
    std::size_t n_paths = 0;
    std::size_t n_times = 0;
    std::vector<double> h_norm;  // [path * n_times + j]
    double at(std::size_t p, std::size_t j) const { return h_norm[p * n_times + j]; }
};
PathNorms path_norms(const SolutionEnsemble& ensemble, const WeightGrid& grid);
/// Norms of the pathwise difference a - b.
PathNorms difference_norms(const SolutionEnsemble& a, const SolutionEnsemble& b, const WeightGrid& grid);

struct NormEstimate {
    double value = 0.0;           // the p-norm, i.e. the p-th root
    double standard_error = 0.0;  // delta method on the p-th root
    std::size_t argmax_time = 0;  // time node attaining the sup (script norm)
};

/// (sup_t E|u(t)|_H^p)^{1/p}.
NormEstimate norm_script_Hp(const PathNorms& norms, double p);
NormEstimate norm_script_Hp(const SolutionEnsemble& ensemble, const WeightGrid& grid, double p);
/// (E sup_t |u(t)|_H^p)^{1/p}.
NormEstimate norm_bb_Hp(const PathNorms& norms, double p);
NormEstimate norm_bb_Hp(const SolutionEnsemble& ensemble, const WeightGrid& grid, double p);

/// Per time node: sqrt(E|u(t_j)|^2), sqrt(E sup_{s<=t_j}|u(s)|^2), s.e. of the first, live paths.
struct SummaryRow {
    double t, h2_script, h2_bb, se;
    std::size_t n_alive;
};
std::vector<SummaryRow> summarize(const SolutionEnsemble& ensemble, const WeightGrid& grid);

/// |[Psi(u0) - Psi(v0)]|_2 / |u0 - v0|_H on common noise, with Psi the solver named in cfg.method.
double lipschitz_in_initial_datum(const HjmModel& model, const Curve& u0, const Curve& v0, const SolverConfig& cfg);
double lipschitz_in_initial_datum(const HjmModel& model, const Curve& u0, const Curve& v0, const SolverConfig& cfg,
                                  const NoiseSource& noise);

SolutionEnsemble solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg, const NoiseSource& noise);

/// Serial implementations kept as test oracles and benchmark baselines.
/// Picard evaluates every stochastic convolution by its direct double sum.
namespace reference {
SolutionEnsemble euler_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg,
                             const NoiseSource& noise);
PicardResult picard_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg, const NoiseSource& noise);
}  // namespace reference

}  // namespace hjm
