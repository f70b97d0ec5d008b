#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hjm {

/// Deterministic Nemitski volatility (t, x, u) -> sigma(t, x, u) in R^d,
/// evaluated one component at a time.
///
/// Derivatives default to central finite differences with step
/// 1e-6 * (1 + |arg|); builtins override them in closed form and report it
/// through closed_form_derivatives().
class Volatility {
   public:
    virtual ~Volatility() = default;

    virtual std::size_t dimension() const = 0;
    virtual std::string name() const = 0;
    virtual double value(std::size_t k, double t, double x, double u) const = 0;

    virtual double d_x(std::size_t k, double t, double x, double u) const;
    virtual double d_u(std::size_t k, double t, double x, double u) const;
    virtual double d_uu(std::size_t k, double t, double x, double u) const;
    virtual bool closed_form_derivatives() const { return false; }
};

/// sigma together with the declared dominating data audited by the
/// hypothesis checker:
///   |sigma^k_x(t,x,u) - sigma^k_x(t,x,v)| <= beta^k(x) |u - v|,
///   |sigma^k_u| + |sigma^k_uu| <= gamma^k,
///   |int_0^x sigma dy|_K <= r_budget.
struct VolatilitySpec {
    std::shared_ptr<const Volatility> sigma;
    std::function<double(std::size_t k, double x)> beta_curve;
    std::vector<double> gamma_seq;
    double r_budget = 0.0;

    std::size_t dimension() const { return sigma->dimension(); }
};

/// sigma(t, x, u) = s (constant vector). The running integral grows like |s| x,
/// so r_budget is |s| * x_max.
VolatilitySpec constant_vector(std::vector<double> s, double x_max);

/// sigma^k(t, x, u) = a^k exp(-decay x).
VolatilitySpec exp_decay(std::vector<double> amplitude, double decay);

/// sigma^k(t, x, u) = a^k tanh(u) exp(-decay x); bounded with bounded u-derivatives.
VolatilitySpec tanh_bounded(std::vector<double> amplitude, double decay);

/// sigma^k(t, x, u) = g^k u. No a-priori ball bound; r_budget is declared by the caller.
VolatilitySpec linear_in_u(std::vector<double> slope, double r_budget);

/// sigma^k(t, x, u) = q^k u^2 exp(-decay x); violates the bounded-derivative hypothesis.
VolatilitySpec quadratic_in_u(std::vector<double> coefficient, double decay, double r_budget);

/// Zero volatility of dimension d.
VolatilitySpec zero_volatility(std::size_t d);

}  // namespace hjm
