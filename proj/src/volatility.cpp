#include "hjm/volatility.hpp"

#include <cmath>
#include <stdexcept>

namespace hjm {

namespace {
double fd_step(double a) { return 1e-6 * (1.0 + std::abs(a)); }

double l2(const std::vector<double>& v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
}

void require_nonempty(const std::vector<double>& v, const char* who) {
    if (v.empty()) throw std::invalid_argument(std::string(who) + ": need at least one component");
}
}  // namespace

double Volatility::d_x(std::size_t k, double t, double x, double u) const {
    const double h = fd_step(x);
    const double lo = std::max(0.0, x - h);
    return (value(k, t, x + h, u) - value(k, t, lo, u)) / (x + h - lo);
}

double Volatility::d_u(std::size_t k, double t, double x, double u) const {
    const double h = fd_step(u);
    return (value(k, t, x, u + h) - value(k, t, x, u - h)) / (2.0 * h);
}

double Volatility::d_uu(std::size_t k, double t, double x, double u) const {
    const double h = 1e-4 * (1.0 + std::abs(u));
    return (value(k, t, x, u + h) - 2.0 * value(k, t, x, u) + value(k, t, x, u - h)) / (h * h);
}

namespace {

class ConstantVector final : public Volatility {
   public:
    explicit ConstantVector(std::vector<double> s) : s_(std::move(s)) {}
    std::size_t dimension() const override { return s_.size(); }
    std::string name() const override { return "constant_vector"; }
    double value(std::size_t k, double, double, double) const override { return s_[k]; }
    double d_x(std::size_t, double, double, double) const override { return 0.0; }
    double d_u(std::size_t, double, double, double) const override { return 0.0; }
    double d_uu(std::size_t, double, double, double) const override { return 0.0; }
    bool closed_form_derivatives() const override { return true; }

   private:
    std::vector<double> s_;
};

class ExpDecay final : public Volatility {
   public:
    ExpDecay(std::vector<double> a, double decay) : a_(std::move(a)), decay_(decay) {}
    std::size_t dimension() const override { return a_.size(); }
    std::string name() const override { return "exp_decay"; }
    double value(std::size_t k, double, double x, double) const override { return a_[k] * std::exp(-decay_ * x); }
    double d_x(std::size_t k, double, double x, double) const override {
        return -decay_ * a_[k] * std::exp(-decay_ * x);
    }
    double d_u(std::size_t, double, double, double) const override { return 0.0; }
    double d_uu(std::size_t, double, double, double) const override { return 0.0; }
    bool closed_form_derivatives() const override { return true; }

   private:
    std::vector<double> a_;
    double decay_;
};

class TanhBounded final : public Volatility {
   public:
    TanhBounded(std::vector<double> a, double decay) : a_(std::move(a)), decay_(decay) {}
    std::size_t dimension() const override { return a_.size(); }
    std::string name() const override { return "tanh_bounded"; }
    double value(std::size_t k, double, double x, double u) const override {
        return a_[k] * std::tanh(u) * std::exp(-decay_ * x);
    }
    double d_x(std::size_t k, double, double x, double u) const override {
        return -decay_ * a_[k] * std::tanh(u) * std::exp(-decay_ * x);
    }
    double d_u(std::size_t k, double, double x, double u) const override {
        const double sech = 1.0 / std::cosh(u);
        return a_[k] * sech * sech * std::exp(-decay_ * x);
    }
    double d_uu(std::size_t k, double, double x, double u) const override {
        const double sech = 1.0 / std::cosh(u);
        return -2.0 * a_[k] * sech * sech * std::tanh(u) * std::exp(-decay_ * x);
    }
    bool closed_form_derivatives() const override { return true; }

   private:
    std::vector<double> a_;
    double decay_;
};

class LinearInU final : public Volatility {
   public:
    explicit LinearInU(std::vector<double> g) : g_(std::move(g)) {}
    std::size_t dimension() const override { return g_.size(); }
    std::string name() const override { return "linear_in_u"; }
    double value(std::size_t k, double, double, double u) const override { return g_[k] * u; }
    double d_x(std::size_t, double, double, double) const override { return 0.0; }
    double d_u(std::size_t k, double, double, double) const override { return g_[k]; }
    double d_uu(std::size_t, double, double, double) const override { return 0.0; }
    bool closed_form_derivatives() const override { return true; }

   private:
    std::vector<double> g_;
};

// Finite-difference derivatives on purpose: exercises the flagged fallback.
class QuadraticInU final : public Volatility {
   public:
    QuadraticInU(std::vector<double> q, double decay) : q_(std::move(q)), decay_(decay) {}
    std::size_t dimension() const override { return q_.size(); }
    std::string name() const override { return "quadratic_in_u"; }
    double value(std::size_t k, double, double x, double u) const override {
        return q_[k] * u * u * std::exp(-decay_ * x);
    }

   private:
    std::vector<double> q_;
    double decay_;
};

}  // namespace

VolatilitySpec constant_vector(std::vector<double> s, double x_max) {
    require_nonempty(s, "constant_vector");
    VolatilitySpec spec;
    spec.r_budget = l2(s) * x_max;
    spec.gamma_seq.assign(s.size(), 0.0);
    spec.beta_curve = [](std::size_t, double) { return 0.0; };
    spec.sigma = std::make_shared<ConstantVector>(std::move(s));
    return spec;
}

VolatilitySpec exp_decay(std::vector<double> amplitude, double decay) {
    require_nonempty(amplitude, "exp_decay");
    if (!(decay > 0.0)) throw std::invalid_argument("exp_decay: decay must be positive");
    VolatilitySpec spec;
    spec.r_budget = l2(amplitude) / decay;
    spec.gamma_seq.assign(amplitude.size(), 0.0);
    spec.beta_curve = [](std::size_t, double) { return 0.0; };
    spec.sigma = std::make_shared<ExpDecay>(std::move(amplitude), decay);
    return spec;
}

VolatilitySpec tanh_bounded(std::vector<double> amplitude, double decay) {
    require_nonempty(amplitude, "tanh_bounded");
    if (!(decay > 0.0)) throw std::invalid_argument("tanh_bounded: decay must be positive");
    VolatilitySpec spec;
    spec.r_budget = l2(amplitude) / decay;
    // sup_u sech^2(u) (1 + 2 |tanh u|) is attained at tanh u = (sqrt(13) - 1) / 6
    const double s = (std::sqrt(13.0) - 1.0) / 6.0;
    const double bound = (1.0 - s * s) * (1.0 + 2.0 * s);
    for (double a : amplitude) spec.gamma_seq.push_back(std::abs(a) * bound);
    // sigma_x is Lipschitz in u with constant decay * |a^k| e^{-decay x}
    auto amp = amplitude;
    spec.beta_curve = [amp, decay](std::size_t k, double x) { return decay * std::abs(amp[k]) * std::exp(-decay * x); };
    spec.sigma = std::make_shared<TanhBounded>(std::move(amplitude), decay);
    return spec;
}

VolatilitySpec linear_in_u(std::vector<double> slope, double r_budget) {
    require_nonempty(slope, "linear_in_u");
    VolatilitySpec spec;
    spec.r_budget = r_budget;
    for (double g : slope) spec.gamma_seq.push_back(std::abs(g));
    spec.beta_curve = [](std::size_t, double) { return 0.0; };
    spec.sigma = std::make_shared<LinearInU>(std::move(slope));
    return spec;
}

VolatilitySpec quadratic_in_u(std::vector<double> coefficient, double decay, double r_budget) {
    require_nonempty(coefficient, "quadratic_in_u");
    VolatilitySpec spec;
    spec.r_budget = r_budget;
    // Declared as if bounded; the sampled audit is expected to refute it.
    for (double q : coefficient) spec.gamma_seq.push_back(2.0 * std::abs(q));
    auto c = coefficient;
    spec.beta_curve = [c, decay](std::size_t k, double x) { return 2.0 * decay * std::abs(c[k]) * std::exp(-decay * x); };
    spec.sigma = std::make_shared<QuadraticInU>(std::move(coefficient), decay);
    return spec;
}

VolatilitySpec zero_volatility(std::size_t d) {
    if (d == 0) throw std::invalid_argument("zero_volatility: dimension must be >= 1");
    return constant_vector(std::vector<double>(d, 0.0), 0.0);
}

}  // namespace hjm
