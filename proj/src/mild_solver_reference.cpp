// Serial solvers written against the Curve-level model API. They share no
// kernel code with the OpenMP solvers beyond the model operations.
#include <algorithm>
#include <cmath>
#include <sstream>

#include "hjm/mild_solver.hpp"

namespace hjm::reference {

namespace {

bool finite(const Curve& c) {
    return std::all_of(c.values().begin(), c.values().end(), [](double a) { return std::isfinite(a); });
}

void store(SolutionEnsemble& e, std::size_t p, std::size_t j, const Curve& c) {
    std::copy(c.values().begin(), c.values().end(), e.curve(p, j).begin());
}

// f dt + B dM at u; empty optional-like flag on ball exit.
bool increment(const HjmModel& model, double t, const Curve& u, const std::vector<double>& dM, double dt,
               Curve& out) {
    Curve f;
    try {
        f = hjm_drift(model, t, u);
    } catch (const BallViolation&) {
        return false;
    }
    out = dt * f;
    out += apply_B(model, t, u, dM);
    return true;
}

}  // namespace

SolutionEnsemble euler_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg,
                             const NoiseSource& noise) {
    cfg.validate(model.driver());
    const WeightGrid& grid = model.grid();
    const double dt = cfg.dt();
    SolutionEnsemble ens(cfg.n_paths, cfg.n_times(), grid.size(), dt, noise.seed());
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        Curve u = u0;
        store(ens, p, 0, u);
        std::size_t exit = never_exited;
        for (std::size_t j = 0; j < cfg.n_steps; ++j) {
            if (exit == never_exited) {
                Curve a;
                if (norm_H(u, grid) > cfg.R_local || !increment(model, cfg.time(j), u, noise.increment(p, j), dt, a)) {
                    exit = j;
                } else {
                    Curve next = shift(u, dt, grid) + a;
                    if (finite(next)) {
                        u = std::move(next);
                    } else {
                        exit = j;
                        ens.diagnostics[p] = "non-finite value at step " + std::to_string(j);
                    }
                }
            }
            store(ens, p, j + 1, u);
        }
        if (exit == never_exited && norm_H(u, grid) > cfg.R_local) exit = cfg.n_steps;
        ens.exit_index[p] = exit;
    }
    return ens;
}

PicardResult picard_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg, const NoiseSource& noise) {
    cfg.validate(model.driver());
    const WeightGrid& grid = model.grid();
    const double dt = cfg.dt();
    const std::size_t N = cfg.n_steps;

    SolutionEnsemble prev(cfg.n_paths, cfg.n_times(), grid.size(), dt, noise.seed());
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        std::size_t exit = never_exited;
        Curve frozen;
        for (std::size_t j = 0; j <= N; ++j) {
            if (exit == never_exited) {
                Curve c = shift(u0, cfg.time(j), grid);
                if (norm_H(c, grid) > cfg.R_local) exit = j;
                store(prev, p, j, c);
                frozen = std::move(c);
            } else {
                store(prev, p, j, frozen);
            }
        }
        prev.exit_index[p] = exit;
    }

    PicardResult result;
    for (std::size_t sweep = 1; sweep <= cfg.n_picard; ++sweep) {
        SolutionEnsemble next(cfg.n_paths, cfg.n_times(), grid.size(), dt, noise.seed());
        for (std::size_t p = 0; p < cfg.n_paths; ++p) {
            // Increments from the previous iterate; a failed ball check ends the list.
            std::vector<Curve> terms;
            for (std::size_t j = 0; j < N; ++j) {
                Curve a;
                if (!increment(model, cfg.time(j), prev.curve_copy(p, j), noise.increment(p, j), dt, a)) break;
                terms.push_back(std::move(a));
            }
            std::size_t exit = never_exited;
            Curve u = u0;
            store(next, p, 0, u);
            for (std::size_t n = 1; n <= N; ++n) {
                if (exit == never_exited) {
                    const std::size_t j = n - 1;
                    if (norm_H(u, grid) > cfg.R_local || j >= terms.size()) {
                        exit = j;
                    } else {
                        // direct double sum of the mild formula at t_n
                        Curve c = shift(u0, cfg.time(n), grid);
                        for (std::size_t i = 0; i < n; ++i)
                            c += shift(terms[i], static_cast<double>(n - i) * dt, grid);
                        if (finite(c)) {
                            u = std::move(c);
                        } else {
                            exit = j;
                            next.diagnostics[p] = "non-finite value at step " + std::to_string(j);
                        }
                    }
                }
                store(next, p, n, u);
            }
            if (exit == never_exited && norm_H(u, grid) > cfg.R_local) exit = N;
            next.exit_index[p] = exit;
        }

        double sup = 0.0;
        std::vector<double> col(cfg.n_paths);
        for (std::size_t j = 0; j <= N; ++j) {
            for (std::size_t p = 0; p < cfg.n_paths; ++p) {
                const double h = norm_H(next.curve_copy(p, j) - prev.curve_copy(p, j), grid);
                col[p] = h * h;
            }
            sup = std::max(sup, compensated_sum(col) / static_cast<double>(cfg.n_paths));
        }
        result.residuals.push_back(std::sqrt(sup));
        result.sweeps = sweep;
        prev = std::move(next);
        if (result.residuals.back() < cfg.picard_tol) {
            result.converged = true;
            break;
        }
    }
    const auto& r = result.residuals;
    if (!result.converged && r.size() >= 2 && r.back() >= r[r.size() - 2]) {
        std::ostringstream msg;
        msg << "picard: residuals stopped decreasing after " << r.size() << " sweeps; reduce T or R_local";
        throw NonConvergenceError(msg.str());
    }
    result.ensemble = std::move(prev);
    return result;
}

}  // namespace hjm::reference
