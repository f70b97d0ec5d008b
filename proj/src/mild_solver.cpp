#include "hjm/mild_solver.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>

namespace hjm {

void SolverConfig::validate(const LevyDriver& driver) const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("solver: " + what); };
    if (!(T > 0.0)) fail("T must be positive");
    if (n_steps < 1) fail("n_steps must be >= 1");
    if (n_paths < 1) fail("n_paths must be >= 1");
    if (n_picard < 1) fail("n_picard must be >= 1");
    if (!(picard_tol > 0.0)) fail("picard_tol must be positive");
    if (!(R_local > 0.0)) fail("R_local must be positive");
    if (!(p >= 2.0)) fail("p must be >= 2");
    if (p > driver.p_max()) {
        std::ostringstream msg;
        msg << "p = " << p << " exceeds driver p_max = " << driver.p_max();
        fail(msg.str());
    }
}

SolutionEnsemble::SolutionEnsemble(std::size_t paths, std::size_t times, std::size_t nodes, double dt_,
                                   std::uint64_t seed_)
    : n_paths(paths),
      n_times(times),
      n_nodes(nodes),
      dt(dt_),
      seed(seed_),
      values(paths * times * nodes),
      exit_index(paths, never_exited),
      diagnostics(paths) {}

std::span<const double> SolutionEnsemble::curve(std::size_t p, std::size_t j) const {
    return std::span<const double>(values).subspan((p * n_times + j) * n_nodes, n_nodes);
}
std::span<double> SolutionEnsemble::curve(std::size_t p, std::size_t j) {
    return std::span<double>(values).subspan((p * n_times + j) * n_nodes, n_nodes);
}
std::span<const double> SolutionEnsemble::path(std::size_t p) const {
    return std::span<const double>(values).subspan(p * n_times * n_nodes, n_times * n_nodes);
}
std::span<double> SolutionEnsemble::path(std::size_t p) {
    return std::span<double>(values).subspan(p * n_times * n_nodes, n_times * n_nodes);
}
Curve SolutionEnsemble::curve_copy(std::size_t p, std::size_t j) const {
    auto c = curve(p, j);
    return Curve(std::vector<double>(c.begin(), c.end()));
}
double SolutionEnsemble::exit_time(std::size_t p) const {
    return exit_index[p] == never_exited ? std::numeric_limits<double>::infinity()
                                         : static_cast<double>(exit_index[p]) * dt;
}
std::size_t SolutionEnsemble::n_alive(std::size_t j) const {
    return static_cast<std::size_t>(
        std::count_if(exit_index.begin(), exit_index.end(), [j](std::size_t e) { return e == never_exited || e > j; }));
}

NoiseSource default_noise(const LevyDriver& driver, const SolverConfig& cfg) {
    return NoiseSource(driver, cfg.seed, cfg.dt(), 1);
}

namespace {

void require_grid(const HjmModel& model, const Curve& u0) {
    if (u0.size() != model.grid().size()) throw std::invalid_argument("solver: u0 does not match model grid");
}

void require_noise(const HjmModel& model, const SolverConfig& cfg, const NoiseSource& noise) {
    if (noise.dimension() != model.dimension()) throw std::invalid_argument("solver: noise dimension mismatch");
    if (std::abs(noise.dt() - cfg.dt()) > 1e-12 * cfg.dt())
        throw std::invalid_argument("solver: noise step does not match T / n_steps");
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

/// First exception thrown inside a parallel region, rethrown after it.
class ErrorSlot {
   public:
    template <class F>
    void run(F&& f) {
        try {
            f();
        } catch (...) {
            std::lock_guard<std::mutex> lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

   private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

/// Per-worker scratch for one path.
struct PathScratch {
    explicit PathScratch(const HjmModel& model)
        : ws(model), f(model.grid().size()), b(model.grid().size()), tmp(model.grid().size()),
          dM(model.dimension()) {}
    ModelWorkspace ws;
    std::vector<double> f, b, tmp, dM;
};

// a = f dt + B dM from coefficients evaluated on `coef`; false on ball exit.
bool increment_term(const HjmModel& model, double t, std::span<const double> coef, std::span<const double> dM,
                    double dt, PathScratch& s) {
    evaluate_sigma(model, t, coef, s.ws);
    if (!drift_from_sigma(model, s.ws, s.f)) return false;
    std::fill(s.b.begin(), s.b.end(), 0.0);
    add_noise_from_sigma(model, s.ws, dM, s.b);
    for (std::size_t i = 0; i < s.b.size(); ++i) s.b[i] = s.f[i] * dt + s.b[i];
    return true;
}

// One Euler path; `path` holds n_times * n values; returns the exit index.
std::size_t euler_path(const HjmModel& model, const Curve& u0, const SolverConfig& cfg, const NoiseSource& noise,
                       std::size_t p, std::span<double> path, PathScratch& s, std::string& diag) {
    const WeightGrid& grid = model.grid();
    const std::size_t n = grid.size();
    const double dt = cfg.dt();
    std::copy(u0.values().begin(), u0.values().end(), path.begin());
    std::size_t exit = never_exited;
    for (std::size_t j = 0; j < cfg.n_steps; ++j) {
        auto cur = path.subspan(j * n, n);
        auto next = path.subspan((j + 1) * n, n);
        if (exit == never_exited) {
            noise.increment(p, j, s.dM);
            if (norm_H(cur, grid) > cfg.R_local || !increment_term(model, cfg.time(j), cur, s.dM, dt, s)) {
                exit = j;
            } else {
                shift_into(cur, dt, grid, next);
                for (std::size_t i = 0; i < n; ++i) next[i] = next[i] + s.b[i];
                if (!all_finite(next)) {
                    exit = j;
                    diag = "non-finite value at step " + std::to_string(j);
                }
            }
        }
        if (exit != never_exited) std::copy_n(path.begin() + static_cast<std::ptrdiff_t>(exit * n), n, next.begin());
    }
    if (exit == never_exited && norm_H(path.subspan(cfg.n_steps * n, n), grid) > cfg.R_local) exit = cfg.n_steps;
    return exit;
}

}  // namespace

Curve stochastic_convolution(const HjmModel& model, std::span<const VectorCurve> integrand,
                             std::span<const std::vector<double>> noise, double dt, std::size_t t_index) {
    const WeightGrid& grid = model.grid();
    if (t_index > integrand.size() || t_index > noise.size())
        throw std::invalid_argument("stochastic_convolution: t_index beyond the step arrays");
    const std::size_t n = grid.size();
    Curve out(n, 0.0), term(n, 0.0);
    std::vector<double> shifted(n);
    for (std::size_t j = 0; j < t_index; ++j) {
        const VectorCurve& F = integrand[j];
        if (F.n_nodes() != n || F.dimension() != noise[j].size())
            throw std::invalid_argument("stochastic_convolution: inconsistent step arrays");
        std::fill(term.values().begin(), term.values().end(), 0.0);
        for (std::size_t k = 0; k < F.dimension(); ++k) {
            const double m = noise[j][k];
            for (std::size_t i = 0; i < n; ++i) term[i] += F(k, i) * m;
        }
        shift_into(term.values(), static_cast<double>(t_index - j) * dt, grid, shifted);
        for (std::size_t i = 0; i < n; ++i) out[i] += shifted[i];
    }
    return out;
}

void euler_stream(const HjmModel& model, const Curve& u0, const SolverConfig& cfg, const NoiseSource& noise,
                  const PathObserver& observer) {
    cfg.validate(model.driver());
    require_grid(model, u0);
    require_noise(model, cfg, noise);
    const std::size_t n = model.grid().size();
    const std::size_t n_times = cfg.n_times();
    ErrorSlot errors;
    const auto n_paths = static_cast<std::ptrdiff_t>(cfg.n_paths);
#pragma omp parallel
    {
        PathScratch s(model);
        std::vector<double> path(n_times * n);
        std::string diag;
#pragma omp for schedule(static)
        for (std::ptrdiff_t ip = 0; ip < n_paths; ++ip) {
            errors.run([&] {
                const auto p = static_cast<std::size_t>(ip);
                diag.clear();
                const std::size_t exit = euler_path(model, u0, cfg, noise, p, path, s, diag);
                observer(PathView{p, n_times, n, path, exit});
            });
        }
    }
    errors.rethrow();
}

SolutionEnsemble euler_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg,
                             const NoiseSource& noise) {
    cfg.validate(model.driver());
    require_grid(model, u0);
    require_noise(model, cfg, noise);
    const std::size_t n = model.grid().size();
    SolutionEnsemble ens(cfg.n_paths, cfg.n_times(), n, cfg.dt(), noise.seed());
    ErrorSlot errors;
    const auto n_paths = static_cast<std::ptrdiff_t>(cfg.n_paths);
#pragma omp parallel
    {
        PathScratch s(model);
#pragma omp for schedule(static)
        for (std::ptrdiff_t ip = 0; ip < n_paths; ++ip) {
            errors.run([&] {
                const auto p = static_cast<std::size_t>(ip);
                ens.exit_index[p] = euler_path(model, u0, cfg, noise, p, ens.path(p), s, ens.diagnostics[p]);
            });
        }
    }
    errors.rethrow();
    return ens;
}

SolutionEnsemble euler_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg) {
    return euler_solve(model, u0, cfg, default_noise(model.driver(), cfg));
}

double PicardResult::contraction_ratio() const {
    for (std::size_t m = residuals.size(); m-- > 1;)
        if (residuals[m - 1] > 0.0) return residuals[m] / residuals[m - 1];
    return 0.0;
}

namespace {

// New iterate of one path with coefficients on `prev`; returns the exit index.
std::size_t picard_path(const HjmModel& model, const Curve& u0, const SolverConfig& cfg,
                        std::span<const double> noise_record, std::span<const double> prev, std::span<double> next,
                        PathScratch& s, std::string& diag) {
    const WeightGrid& grid = model.grid();
    const std::size_t n = grid.size();
    const std::size_t d = model.dimension();
    const double dt = cfg.dt();
    std::copy(u0.values().begin(), u0.values().end(), next.begin());
    std::size_t exit = never_exited;
    for (std::size_t j = 0; j < cfg.n_steps; ++j) {
        auto cur = next.subspan(j * n, n);
        auto out = next.subspan((j + 1) * n, n);
        if (exit == never_exited) {
            if (norm_H(cur, grid) > cfg.R_local ||
                !increment_term(model, cfg.time(j), prev.subspan(j * n, n), noise_record.subspan(j * d, d), dt, s)) {
                exit = j;
            } else {
                for (std::size_t i = 0; i < n; ++i) s.tmp[i] = cur[i] + s.b[i];
                shift_into(s.tmp, dt, grid, out);
                if (!all_finite(out)) {
                    exit = j;
                    diag = "non-finite value at step " + std::to_string(j);
                }
            }
        }
        if (exit != never_exited) std::copy_n(next.begin() + static_cast<std::ptrdiff_t>(exit * n), n, out.begin());
    }
    if (exit == never_exited && norm_H(next.subspan(cfg.n_steps * n, n), grid) > cfg.R_local) exit = cfg.n_steps;
    return exit;
}

std::size_t transport_path(const HjmModel& model, const Curve& u0, const SolverConfig& cfg, std::span<double> out) {
    const WeightGrid& grid = model.grid();
    const std::size_t n = grid.size();
    std::size_t exit = never_exited;
    for (std::size_t j = 0; j < cfg.n_times(); ++j) {
        auto c = out.subspan(j * n, n);
        if (exit == never_exited) {
            shift_into(u0.values(), cfg.time(j), grid, c);
            if (norm_H(c, grid) > cfg.R_local) exit = j;
        } else {
            std::copy_n(out.begin() + static_cast<std::ptrdiff_t>(exit * n), n, c.begin());
        }
    }
    return exit;
}

// sqrt(sup_j mean_p |a - b|_H^2), reduced serially in path order.
double picard_residual(const SolutionEnsemble& a, const SolutionEnsemble& b, const WeightGrid& grid) {
    const PathNorms diff = difference_norms(a, b, grid);
    std::vector<double> col(diff.n_paths);
    double sup = 0.0;
    for (std::size_t j = 0; j < diff.n_times; ++j) {
        for (std::size_t p = 0; p < diff.n_paths; ++p) col[p] = diff.at(p, j) * diff.at(p, j);
        sup = std::max(sup, compensated_sum(col) / static_cast<double>(diff.n_paths));
    }
    return std::sqrt(sup);
}

}  // namespace

PicardResult picard_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg,
                          const NoiseSource& noise) {
    cfg.validate(model.driver());
    require_grid(model, u0);
    require_noise(model, cfg, noise);
    const std::size_t n = model.grid().size();
    const std::size_t d = model.dimension();
    const std::size_t N = cfg.n_steps;
    const auto n_paths = static_cast<std::ptrdiff_t>(cfg.n_paths);

    std::vector<double> record(cfg.n_paths * N * d);
    SolutionEnsemble prev(cfg.n_paths, cfg.n_times(), n, cfg.dt(), noise.seed());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ip = 0; ip < n_paths; ++ip) {
        const auto p = static_cast<std::size_t>(ip);
        for (std::size_t j = 0; j < N; ++j)
            noise.increment(p, j, std::span<double>(record).subspan((p * N + j) * d, d));
        prev.exit_index[p] = transport_path(model, u0, cfg, prev.path(p));
    }

    PicardResult result;
    SolutionEnsemble next = prev;
    ErrorSlot errors;
    for (std::size_t sweep = 1; sweep <= cfg.n_picard; ++sweep) {
#pragma omp parallel
        {
            PathScratch s(model);
#pragma omp for schedule(static)
            for (std::ptrdiff_t ip = 0; ip < n_paths; ++ip) {
                errors.run([&] {
                    const auto p = static_cast<std::size_t>(ip);
                    next.diagnostics[p].clear();
                    next.exit_index[p] =
                        picard_path(model, u0, cfg, std::span<const double>(record).subspan(p * N * d, N * d),
                                    prev.path(p), next.path(p), s, next.diagnostics[p]);
                });
            }
        }
        errors.rethrow();
        result.residuals.push_back(picard_residual(next, prev, model.grid()));
        result.sweeps = sweep;
        std::swap(prev, next);
        if (result.residuals.back() < cfg.picard_tol) {
            result.converged = true;
            break;
        }
    }
    const auto& r = result.residuals;
    if (!result.converged && r.size() >= 2 && r.back() >= r[r.size() - 2]) {
        std::ostringstream msg;
        msg << "picard: residuals stopped decreasing after " << r.size() << " sweeps (last " << r.back()
            << "); reduce T or R_local";
        throw NonConvergenceError(msg.str());
    }
    result.ensemble = std::move(prev);
    return result;
}

PicardResult picard_solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg) {
    return picard_solve(model, u0, cfg, default_noise(model.driver(), cfg));
}

SolutionEnsemble solve(const HjmModel& model, const Curve& u0, const SolverConfig& cfg, const NoiseSource& noise) {
    if (cfg.method == SolverMethod::euler) return euler_solve(model, u0, cfg, noise);
    return picard_solve(model, u0, cfg, noise).ensemble;
}

// --- Norm estimators ---

PathNorms path_norms(const SolutionEnsemble& e, const WeightGrid& grid) {
    if (e.n_nodes != grid.size()) throw std::invalid_argument("path_norms: ensemble does not match grid");
    PathNorms out{e.n_paths, e.n_times, std::vector<double>(e.n_paths * e.n_times)};
    const auto total = static_cast<std::ptrdiff_t>(e.n_paths * e.n_times);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
        const auto k = static_cast<std::size_t>(idx);
        out.h_norm[k] = norm_H(e.curve(k / e.n_times, k % e.n_times), grid);
    }
    return out;
}

PathNorms difference_norms(const SolutionEnsemble& a, const SolutionEnsemble& b, const WeightGrid& grid) {
    if (a.n_paths != b.n_paths || a.n_times != b.n_times || a.n_nodes != b.n_nodes || a.n_nodes != grid.size())
        throw std::invalid_argument("difference_norms: shape mismatch");
    PathNorms out{a.n_paths, a.n_times, std::vector<double>(a.n_paths * a.n_times)};
    const auto total = static_cast<std::ptrdiff_t>(a.n_paths * a.n_times);
#pragma omp parallel
    {
        std::vector<double> diff(a.n_nodes);
#pragma omp for schedule(static)
        for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
            const auto k = static_cast<std::size_t>(idx);
            auto ca = a.curve(k / a.n_times, k % a.n_times);
            auto cb = b.curve(k / a.n_times, k % a.n_times);
            for (std::size_t i = 0; i < a.n_nodes; ++i) diff[i] = ca[i] - cb[i];
            out.h_norm[k] = norm_H(diff, grid);
        }
    }
    return out;
}

namespace {
NormEstimate root_estimate(const McEstimate& m, double p, std::size_t argmax) {
    NormEstimate e;
    e.value = std::pow(m.mean, 1.0 / p);
    e.standard_error = m.mean > 0.0 ? m.standard_error * e.value / (p * m.mean) : 0.0;
    e.argmax_time = argmax;
    return e;
}
}  // namespace

NormEstimate norm_script_Hp(const PathNorms& norms, double p) {
    if (norms.n_paths == 0 || norms.n_times == 0) throw std::invalid_argument("norm_script_Hp: empty ensemble");
    std::vector<double> col(norms.n_paths);
    McEstimate best;
    std::size_t argmax = 0;
    for (std::size_t j = 0; j < norms.n_times; ++j) {
        for (std::size_t q = 0; q < norms.n_paths; ++q) col[q] = std::pow(norms.at(q, j), p);
        const McEstimate m = mc_estimate(col);
        if (j == 0 || m.mean > best.mean) {
            best = m;
            argmax = j;
        }
    }
    return root_estimate(best, p, argmax);
}

NormEstimate norm_bb_Hp(const PathNorms& norms, double p) {
    if (norms.n_paths == 0 || norms.n_times == 0) throw std::invalid_argument("norm_bb_Hp: empty ensemble");
    std::vector<double> col(norms.n_paths);
    for (std::size_t q = 0; q < norms.n_paths; ++q) {
        double s = 0.0;
        for (std::size_t j = 0; j < norms.n_times; ++j) s = std::max(s, norms.at(q, j));
        col[q] = std::pow(s, p);
    }
    return root_estimate(mc_estimate(col), p, 0);
}

NormEstimate norm_script_Hp(const SolutionEnsemble& e, const WeightGrid& grid, double p) {
    return norm_script_Hp(path_norms(e, grid), p);
}

NormEstimate norm_bb_Hp(const SolutionEnsemble& e, const WeightGrid& grid, double p) {
    return norm_bb_Hp(path_norms(e, grid), p);
}

std::vector<SummaryRow> summarize(const SolutionEnsemble& e, const WeightGrid& grid) {
    const PathNorms norms = path_norms(e, grid);
    std::vector<double> running_sup(e.n_paths, 0.0), sq(e.n_paths), sup_sq(e.n_paths);
    std::vector<SummaryRow> rows;
    for (std::size_t j = 0; j < e.n_times; ++j) {
        for (std::size_t q = 0; q < e.n_paths; ++q) {
            const double h = norms.at(q, j);
            running_sup[q] = std::max(running_sup[q], h);
            sq[q] = h * h;
            sup_sq[q] = running_sup[q] * running_sup[q];
        }
        const NormEstimate script = root_estimate(mc_estimate(sq), 2.0, j);
        const NormEstimate bb = root_estimate(mc_estimate(sup_sq), 2.0, j);
        rows.push_back({static_cast<double>(j) * e.dt, script.value, bb.value, script.standard_error, e.n_alive(j)});
    }
    return rows;
}

double lipschitz_in_initial_datum(const HjmModel& model, const Curve& u0, const Curve& v0, const SolverConfig& cfg,
                                  const NoiseSource& noise) {
    require_grid(model, u0);
    require_grid(model, v0);
    const double d0 = norm_H(u0 - v0, model.grid());
    if (!(d0 > 0.0)) throw std::invalid_argument("lipschitz_in_initial_datum: u0 and v0 must differ");
    const SolutionEnsemble a = solve(model, u0, cfg, noise);
    const SolutionEnsemble b = solve(model, v0, cfg, noise);
    return norm_script_Hp(difference_norms(a, b, model.grid()), 2.0).value / d0;
}

double lipschitz_in_initial_datum(const HjmModel& model, const Curve& u0, const Curve& v0,
                                  const SolverConfig& cfg) {
    return lipschitz_in_initial_datum(model, u0, v0, cfg, default_noise(model.driver(), cfg));
}

}  // namespace hjm
