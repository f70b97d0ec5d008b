#include "hjm/hjm_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hjm/rng.hpp"

namespace hjm {

HjmModel::HjmModel(VolatilitySpec vol, LevyDriver driver, WeightGrid grid, int drift_sign, EvaluationMode mode)
    : vol_(std::move(vol)), cumulant_(std::move(driver), mode), grid_(std::move(grid)), drift_sign_(drift_sign) {
    if (!vol_.sigma) throw std::invalid_argument("HjmModel: volatility is not set");
    if (vol_.dimension() != cumulant_.driver().dimension()) {
        std::ostringstream msg;
        msg << "HjmModel: volatility dimension " << vol_.dimension() << " does not match driver dimension "
            << cumulant_.driver().dimension();
        throw std::invalid_argument(msg.str());
    }
    if (drift_sign_ != 1 && drift_sign_ != -1) throw std::invalid_argument("HjmModel: drift_sign must be +1 or -1");
    if (vol_.r_budget > cumulant_.driver().r_ball()) {
        std::ostringstream msg;
        msg << "HjmModel: volatility ball budget " << vol_.r_budget << " exceeds cumulant radius r_ball = "
            << cumulant_.driver().r_ball();
        throw std::invalid_argument(msg.str());
    }
}

HjmModel HjmModel::with_drift_sign(int sign) const {
    return HjmModel(vol_, cumulant_.driver(), grid_, sign, cumulant_.mode());
}

ModelWorkspace::ModelWorkspace(const HjmModel& model)
    : sigma(model.dimension() * model.grid().size()),
      running(model.dimension() * model.grid().size()),
      zeta(model.dimension()),
      grad(model.dimension()) {}

void evaluate_sigma(const HjmModel& model, double t, std::span<const double> u, ModelWorkspace& ws) {
    const std::size_t n = model.grid().size();
    const std::size_t d = model.dimension();
    const auto x = model.grid().nodes();
    const Volatility& vol = *model.vol().sigma;
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < n; ++i) ws.sigma[k * n + i] = vol.value(k, t, x[i], u[i]);
}

bool drift_from_sigma(const HjmModel& model, ModelWorkspace& ws, std::span<double> out) {
    const WeightGrid& grid = model.grid();
    const std::size_t n = grid.size();
    const std::size_t d = model.dimension();
    for (std::size_t k = 0; k < d; ++k)
        cumulative_integral(std::span<const double>(ws.sigma).subspan(k * n, n), grid,
                            std::span<double>(ws.running).subspan(k * n, n));
    const CumulantModel& cm = model.cumulant();
    const double r2 = model.driver().r_ball() * model.driver().r_ball() * (1.0 + 1e-12);
    const double sign = static_cast<double>(model.drift_sign());
    for (std::size_t i = 0; i < n; ++i) {
        double norm2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            ws.zeta[k] = -ws.running[k * n + i];
            norm2 += ws.zeta[k] * ws.zeta[k];
        }
        if (!(norm2 <= r2)) return false;
        double f = 0.0;
        for (std::size_t k = 0; k < d; ++k) f += ws.sigma[k * n + i] * cm.component_grad(k, ws.zeta[k]);
        out[i] = sign * f;
    }
    return true;
}

void add_noise_from_sigma(const HjmModel& model, const ModelWorkspace& ws, std::span<const double> dM,
                          std::span<double> out) {
    const std::size_t n = model.grid().size();
    const std::size_t d = model.dimension();
    for (std::size_t k = 0; k < d; ++k) {
        const double m = dM[k];
        if (m == 0.0) continue;
        const double* s = ws.sigma.data() + k * n;
        for (std::size_t i = 0; i < n; ++i) out[i] += s[i] * m;
    }
}

namespace {
void require_curve(const HjmModel& model, const Curve& u) {
    if (u.size() != model.grid().size()) throw std::invalid_argument("curve does not match model grid");
}
}  // namespace

Curve apply_B(const HjmModel& model, double t, const Curve& u, std::span<const double> phi) {
    require_curve(model, u);
    if (phi.size() != model.dimension()) throw std::invalid_argument("apply_B: phi dimension mismatch");
    ModelWorkspace ws(model);
    evaluate_sigma(model, t, u.values(), ws);
    Curve out(u.size(), 0.0);
    add_noise_from_sigma(model, ws, phi, out.values());
    return out;
}

double hs_norm_B(const HjmModel& model, double t, const Curve& u) {
    require_curve(model, u);
    ModelWorkspace ws(model);
    evaluate_sigma(model, t, u.values(), ws);
    const std::size_t n = u.size();
    double s = 0.0;
    for (std::size_t k = 0; k < model.dimension(); ++k)
        s += weighted_seminorm_sq(std::span<const double>(ws.sigma).subspan(k * n, n), model.grid());
    return std::sqrt(s);
}

VectorCurve sigma_curve(const HjmModel& model, double t, const Curve& u) {
    require_curve(model, u);
    ModelWorkspace ws(model);
    evaluate_sigma(model, t, u.values(), ws);
    VectorCurve v(model.dimension(), u.size());
    for (std::size_t k = 0; k < model.dimension(); ++k) {
        auto dst = v.component(k);
        std::copy_n(ws.sigma.begin() + static_cast<std::ptrdiff_t>(k * u.size()), u.size(), dst.begin());
    }
    return v;
}

double hs_growth_bound_sq(const HjmModel& model, double t, const Curve& u) {
    const WeightGrid& grid = model.grid();
    const Curve zero(grid.size(), 0.0);
    const double sigma0 = norm_frak_H(sigma_curve(model, t, zero), grid);
    double beta_sq = 0.0;
    const auto x = grid.nodes();
    const auto w = grid.quad_weights();
    const auto a = grid.alpha();
    for (std::size_t k = 0; k < model.dimension(); ++k)
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double b = model.vol().beta_curve(k, x[i]);
            beta_sq += w[i] * a[i] * b * b;
        }
    double gamma_sq = 0.0;
    for (double g : model.vol().gamma_seq) gamma_sq += g * g;
    const double c_inf_sq = 1.0 + 1.0 / grid.beta();
    const double uh = norm_H(u, grid);
    return 4.0 * sigma0 * sigma0 + (4.0 * c_inf_sq * beta_sq + 2.0 * gamma_sq) * uh * uh;
}

Curve hjm_drift(const HjmModel& model, double t, const Curve& u) {
    require_curve(model, u);
    ModelWorkspace ws(model);
    evaluate_sigma(model, t, u.values(), ws);
    Curve f(u.size(), 0.0);
    if (!drift_from_sigma(model, ws, f.values()))
        throw BallViolation("hjm_drift: running integral of sigma leaves the cumulant ball");
    return f;
}

Curve drift_functional(const HjmModel& model, const VectorCurve& nu) {
    if (nu.dimension() != model.dimension() || nu.n_nodes() != model.grid().size())
        throw std::invalid_argument("drift_functional: shape mismatch");
    ModelWorkspace ws(model);
    std::copy(nu.values().begin(), nu.values().end(), ws.sigma.begin());
    Curve g(nu.n_nodes(), 0.0);
    // unsigned: undo the model's sign
    if (!drift_from_sigma(model, ws, g.values()))
        throw BallViolation("drift_functional: running integral leaves the cumulant ball");
    if (model.drift_sign() < 0) g *= -1.0;
    return g;
}

// --- Hypothesis audit ---

bool HypothesisReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const HypothesisEntry& e) { return e.pass; });
}

const HypothesisEntry& HypothesisReport::at(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw std::out_of_range("HypothesisReport: no entry " + name);
}

HypothesisReport check_hypotheses(const HjmModel& model, std::size_t sample_budget, std::uint64_t seed,
                                  double t_max) {
    const Volatility& vol = *model.vol().sigma;
    const WeightGrid& grid = model.grid();
    const std::size_t d = model.dimension();
    constexpr std::size_t n_ranges = 6;
    const std::size_t per_range = std::max<std::size_t>(1, sample_budget / n_ranges);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    HypothesisReport report;

    // Smoothness: finite values everywhere; closed-form derivatives agree with differences.
    {
        HypothesisEntry e{"smoothness_C012", true, -std::numeric_limits<double>::infinity(), 0, {}, {}};
        CounterRng rng(seed, 1, 0);
        for (std::size_t s = 0; s < per_range * 2; ++s) {
            const double t = t_max * unit(rng), x = grid.x_max() * unit(rng), u = 4.0 * (2.0 * unit(rng) - 1.0);
            for (std::size_t k = 0; k < d; ++k) {
                const double vals[] = {vol.value(k, t, x, u), vol.d_x(k, t, x, u), vol.d_u(k, t, x, u),
                                       vol.d_uu(k, t, x, u)};
                for (double v : vals)
                    if (!std::isfinite(v)) e.pass = false;
                if (vol.closed_form_derivatives()) {
                    const double hu = 1e-5 * (1.0 + std::abs(u));
                    const double fd_u = (vol.value(k, t, x, u + hu) - vol.value(k, t, x, u - hu)) / (2.0 * hu);
                    const double fd_uu = (vol.d_u(k, t, x, u + hu) - vol.d_u(k, t, x, u - hu)) / (2.0 * hu);
                    const double hx = 1e-5 * (1.0 + x);
                    const double fd_x = (vol.value(k, t, x + hx, u) - vol.value(k, t, x - hx, u)) / (2.0 * hx);
                    const double err = std::max({std::abs(fd_u - vals[2]), std::abs(fd_uu - vals[3]),
                                                 std::abs(fd_x - vals[1])});
                    e.worst_margin = std::max(e.worst_margin, err - 1e-6);
                }
                ++e.samples;
            }
        }
        if (vol.closed_form_derivatives()) {
            if (e.worst_margin > 0.0) e.pass = false;
        } else {
            e.worst_margin = 0.0;
            e.note = "finite-difference fallback derivatives; smoothness not certified";
        }
        report.entries.push_back(std::move(e));
    }

    // |sigma_x(u) - sigma_x(v)| <= beta(x) |u - v|, and beta in L_{2,alpha}(l2).
    {
        HypothesisEntry e{"lipschitz_sigma_x", true, -std::numeric_limits<double>::infinity(), 0, {}, {}};
        CounterRng rng(seed, 2, 0);
        for (std::size_t m = 0; m < n_ranges; ++m) {
            const double U = std::ldexp(1.0, static_cast<int>(m));
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < per_range; ++s) {
                const double t = t_max * unit(rng), x = grid.x_max() * unit(rng);
                const double u = U * (2.0 * unit(rng) - 1.0), v = U * (2.0 * unit(rng) - 1.0);
                for (std::size_t k = 0; k < d; ++k) {
                    const double lhs = std::abs(vol.d_x(k, t, x, u) - vol.d_x(k, t, x, v));
                    const double rhs = model.vol().beta_curve(k, x) * std::abs(u - v);
                    worst = std::max(worst, lhs - rhs - 1e-7 * (1.0 + rhs));
                    ++e.samples;
                }
            }
            e.margin_by_range.push_back(worst);
            e.worst_margin = std::max(e.worst_margin, worst);
        }
        double beta_sq = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double b = model.vol().beta_curve(k, grid.nodes()[i]);
                beta_sq += grid.quad_weights()[i] * grid.alpha()[i] * b * b;
            }
        e.pass = e.worst_margin <= 0.0 && std::isfinite(beta_sq);
        e.note = "|beta|^2_{alpha,l2} = " + std::to_string(beta_sq);
        report.entries.push_back(std::move(e));
    }

    // |sigma_u| + |sigma_uu| <= gamma^k, gamma in l2.
    {
        HypothesisEntry e{"bounded_sigma_u", true, -std::numeric_limits<double>::infinity(), 0, {}, {}};
        CounterRng rng(seed, 3, 0);
        for (std::size_t m = 0; m < n_ranges; ++m) {
            const double U = std::ldexp(1.0, static_cast<int>(m));
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < per_range; ++s) {
                const double t = t_max * unit(rng), x = grid.x_max() * unit(rng), u = U * (2.0 * unit(rng) - 1.0);
                for (std::size_t k = 0; k < d; ++k) {
                    const double lhs = std::abs(vol.d_u(k, t, x, u)) + std::abs(vol.d_uu(k, t, x, u));
                    const double g = model.vol().gamma_seq.at(k);
                    worst = std::max(worst, lhs - g - 1e-7 * (1.0 + g));
                    ++e.samples;
                }
            }
            e.margin_by_range.push_back(worst);
            e.worst_margin = std::max(e.worst_margin, worst);
        }
        e.pass = e.worst_margin <= 0.0;
        report.entries.push_back(std::move(e));
    }

    // |sigma(t,.,0)| bounded over t.
    {
        HypothesisEntry e{"sigma_at_zero_bounded", true, 0.0, 0, {}, {}};
        const Curve zero(grid.size(), 0.0);
        double worst = 0.0;
        for (std::size_t s = 0; s <= 8; ++s) {
            const double t = t_max * static_cast<double>(s) / 8.0;
            worst = std::max(worst, norm_frak_H(sigma_curve(model, t, zero), grid));
            ++e.samples;
        }
        e.worst_margin = worst;
        e.pass = std::isfinite(worst);
        e.note = "sup_t |sigma(t,.,0)| = " + std::to_string(worst);
        report.entries.push_back(std::move(e));
    }

    // Ball budget: |int_0^x sigma(t,y,u(y)) dy|_K <= r_budget <= r_ball.
    {
        HypothesisEntry e{"ball_budget", true, -std::numeric_limits<double>::infinity(), 0, {}, {}};
        CounterRng rng(seed, 5, 0);
        ModelWorkspace ws(model);
        const std::size_t n = grid.size();
        for (std::size_t m = 0; m < n_ranges; ++m) {
            const double scale = std::ldexp(1.0, static_cast<int>(m)) / 4.0;
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < std::max<std::size_t>(1, per_range / 16); ++s) {
                Curve u = RandomSmoothCurve::draw(rng).sample(grid);
                u *= scale;
                evaluate_sigma(model, t_max * unit(rng), u.values(), ws);
                for (std::size_t k = 0; k < d; ++k)
                    cumulative_integral(std::span<const double>(ws.sigma).subspan(k * n, n), grid,
                                        std::span<double>(ws.running).subspan(k * n, n));
                for (std::size_t i = 0; i < n; ++i) {
                    double r2 = 0.0;
                    for (std::size_t k = 0; k < d; ++k) r2 += ws.running[k * n + i] * ws.running[k * n + i];
                    worst = std::max(worst, std::sqrt(r2) - model.vol().r_budget * (1.0 + 1e-12));
                }
                ++e.samples;
            }
            e.margin_by_range.push_back(worst);
            e.worst_margin = std::max(e.worst_margin, worst);
        }
        e.pass = e.worst_margin <= 0.0 && model.vol().r_budget <= model.driver().r_ball();
        report.entries.push_back(std::move(e));
    }

    // Driver moments up to p_max.
    {
        HypothesisEntry e{"driver_moments_Mp", true, 0.0, 1, {}, {}};
        const double mp = moment_mp(model.driver(), model.driver().p_max());
        e.worst_margin = mp;
        e.pass = std::isfinite(mp);
        e.note = "m_p at p_max = " + std::to_string(mp);
        report.entries.push_back(std::move(e));
    }
    return report;
}

// --- Lipschitz estimates ---

namespace {

Curve random_curve_with_norm(CounterRng& rng, const WeightGrid& grid, double target) {
    Curve c = RandomSmoothCurve::draw(rng).sample(grid);
    const double nrm = norm_H(c, grid);
    if (nrm > 0.0) c *= target / nrm;
    return c;
}

double hs_difference(const HjmModel& model, double t, const Curve& u, const Curve& v, ModelWorkspace& wu,
                     ModelWorkspace& wv) {
    evaluate_sigma(model, t, u.values(), wu);
    evaluate_sigma(model, t, v.values(), wv);
    const std::size_t n = u.size();
    std::vector<double> diff(n);
    double s = 0.0;
    for (std::size_t k = 0; k < model.dimension(); ++k) {
        for (std::size_t i = 0; i < n; ++i) diff[i] = wu.sigma[k * n + i] - wv.sigma[k * n + i];
        s += weighted_seminorm_sq(diff, model.grid());
    }
    return std::sqrt(s);
}

}  // namespace

LipschitzEstimate lipschitz_estimate(const HjmModel& model, LipschitzTarget which, double R, std::size_t n_pairs,
                                     std::uint64_t seed, double t) {
    if (!(R > 0.0)) throw std::invalid_argument("lipschitz_estimate: R must be positive");
    if (n_pairs < 1) throw std::invalid_argument("lipschitz_estimate: need at least one pair");
    const WeightGrid& grid = model.grid();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ModelWorkspace wu(model), wv(model);
    LipschitzEstimate est;
    for (std::size_t p = 0; p < n_pairs; ++p) {
        CounterRng rng(seed, p, static_cast<std::uint64_t>(R * 1024.0));
        Curve u = random_curve_with_norm(rng, grid, R * (0.2 + 0.8 * unit(rng)));
        // near pairs probe the local constant, far pairs the global one
        const double eps = R * std::pow(10.0, -3.0 * unit(rng));
        Curve v = u + random_curve_with_norm(rng, grid, eps);
        const double nv = norm_H(v, grid);
        if (nv > R) v *= R / nv;
        const double du = norm_H(u - v, grid);
        if (!(du > 1e-12 * R)) continue;

        double quotient = 0.0;
        if (which == LipschitzTarget::B) {
            quotient = hs_difference(model, t, u, v, wu, wv) / du;
        } else {
            const VectorCurve su = sigma_curve(model, t, u), sv = sigma_curve(model, t, v);
            VectorCurve dsig = su;
            dsig -= sv;
            const double den = norm_frak_H(dsig, grid);
            if (!(den > 1e-14)) continue;
            Curve gu, gv;
            try {
                gu = drift_functional(model, su);
                gv = drift_functional(model, sv);
            } catch (const BallViolation&) {
                continue;
            }
            quotient = norm_H(gu - gv, grid) / den;
        }
        est.raw = std::max(est.raw, quotient);
        ++est.pairs_used;
    }
    const double norm = which == LipschitzTarget::B ? (1.0 + R) : (1.0 + R * R);
    est.constant = est.raw / norm;
    return est;
}

NormComparison compare_modulus_norm(const VectorCurve& phi, const WeightGrid& grid) {
    Curve modulus(phi.n_nodes(), 0.0);
    for (std::size_t i = 0; i < phi.n_nodes(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < phi.dimension(); ++k) s += phi(k, i) * phi(k, i);
        modulus[i] = std::sqrt(s);
    }
    return {norm_H(modulus, grid), norm_frak_H(phi, grid)};
}

}  // namespace hjm
