#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hjm {

/// Truncated maturity grid x_0 = 0 < ... < x_{n-1} = x_max carrying the
/// weight alpha(x) = exp(beta * x) and trapezoid weights for the integral
/// over [0, x_max]. Every curve on the grid is extended flat beyond x_max,
/// so derivatives vanish there and all tail integrals are zero.
class WeightGrid {
   public:
    WeightGrid(std::vector<double> nodes, double beta);

    std::size_t size() const { return nodes_.size(); }
    double x_max() const { return nodes_.back(); }
    double beta() const { return beta_; }
    double alpha_at(double x) const;

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> quad_weights() const { return quad_weights_; }
    std::span<const double> alpha() const { return alpha_; }

    bool uniform() const { return uniform_; }
    // Only meaningful on uniform grids.
    double spacing() const { return spacing_; }
    static constexpr bool flat_extrapolation() { return true; }

    // Number of nodes a shift by t covers, if t is a whole multiple of the
    // spacing on a uniform grid; negative otherwise.
    std::ptrdiff_t aligned_offset(double t) const;

    bool operator==(const WeightGrid& other) const = default;

   private:
    std::vector<double> nodes_;
    double beta_;
    std::vector<double> quad_weights_;
    std::vector<double> alpha_;
    bool uniform_ = false;
    double spacing_ = 0.0;
};

/// Uniform grid on [0, x_max] with n_points nodes.
WeightGrid make_grid(double x_max, std::size_t n_points, double beta);

/// Forward curve u(x_i) sampled at the grid nodes.
class Curve {
   public:
    Curve() = default;
    explicit Curve(std::vector<double> values) : values_(std::move(values)) {}
    Curve(std::size_t n, double fill) : values_(n, fill) {}

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double back() const { return values_.back(); }

    Curve& operator+=(const Curve& other);
    Curve& operator-=(const Curve& other);
    Curve& operator*=(double a);
    bool operator==(const Curve& other) const = default;

   private:
    std::vector<double> values_;
};

Curve operator+(Curve a, const Curve& b);
Curve operator-(Curve a, const Curve& b);
Curve operator*(double a, Curve c);

/// K-valued curve, K = R^d, stored component-major: component k occupies
/// values[k * n, (k + 1) * n).
class VectorCurve {
   public:
    VectorCurve() = default;
    VectorCurve(std::size_t dimension, std::size_t n_nodes, double fill = 0.0);
    static VectorCurve from_components(const std::vector<Curve>& components);

    std::size_t dimension() const { return dimension_; }
    std::size_t n_nodes() const { return n_nodes_; }
    std::span<const double> component(std::size_t k) const;
    std::span<double> component(std::size_t k);
    double operator()(std::size_t k, std::size_t i) const { return values_[k * n_nodes_ + i]; }
    double& operator()(std::size_t k, std::size_t i) { return values_[k * n_nodes_ + i]; }
    std::span<const double> values() const { return values_; }

    VectorCurve& operator-=(const VectorCurve& other);

   private:
    std::size_t dimension_ = 0;
    std::size_t n_nodes_ = 0;
    std::vector<double> values_;
};

// --- Grid calculus. All of these operate on samples at the grid nodes. ---

/// Centered differences in the interior, second-order one-sided at the two endpoints.
std::vector<double> derivative(std::span<const double> values, const WeightGrid& grid);
/// int_0^x_max phi'(x)^2 alpha(x) dx, trapezoid on centered differences.
double weighted_seminorm_sq(std::span<const double> values, const WeightGrid& grid);
/// Trapezoid integral over [0, x_max].
double integrate(std::span<const double> values, const WeightGrid& grid);
/// Running trapezoid integral; out[0] = 0.
void cumulative_integral(std::span<const double> values, const WeightGrid& grid,
                         std::span<double> out);
/// Integral over [0, x] of the piecewise-linear interpolant (flat past x_max).
double integral_to(std::span<const double> values, const WeightGrid& grid, double x);
/// Linear interpolation at x, flat beyond x_max.
double interpolate(std::span<const double> values, const WeightGrid& grid, double x);

double norm_H(const Curve& curve, const WeightGrid& grid);
double norm_H(std::span<const double> values, const WeightGrid& grid);

/// |phi|_*^2 = phi(infinity)^2 + int phi'^2 alpha, with phi(infinity) = phi(x_max).
double norm_star(const Curve& curve, const WeightGrid& grid);
double norm_star(std::span<const double> values, const WeightGrid& grid);

/// |phi|^2 = |phi(0)|_K^2 + int |phi'|_K^2 alpha on K-valued curves.
double norm_frak_H(const VectorCurve& vcurve, const WeightGrid& grid);

/// Right shift (e^{tA} phi)(x) = phi(x + t) with linear interpolation between
/// nodes and flat extrapolation. Node-aligned shifts copy samples exactly.
Curve shift(const Curve& curve, double t, const WeightGrid& grid);
void shift_into(std::span<const double> in, double t, const WeightGrid& grid, std::span<double> out);

struct EmbeddingRatios {
    double sup_ratio;  // |phi|_inf / |phi|_H
    double l1_ratio;   // |phi - phi(inf)|_1 / |phi|_H
    double sq_ratio;   // |(phi - phi(inf))^2|_alpha / |phi|_H^2
};

/// Throws std::domain_error for the zero curve, where the ratios are undefined.
EmbeddingRatios check_embeddings(const Curve& curve, const WeightGrid& grid);

/// Smooth random curve defined on all of R_+, so the same member can be
/// sampled on grids of different resolution:
///     u(x) = level + sum_m a_m exp(-mu_m x) cos(omega_m x + theta_m).
class RandomSmoothCurve {
   public:
    struct Mode {
        double amplitude, decay, frequency, phase;
    };

    template <class Engine>
    static RandomSmoothCurve draw(Engine& rng, std::size_t n_modes = 4, double max_frequency = 2.0) {
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        RandomSmoothCurve c;
        c.level_ = normal(rng);
        for (std::size_t m = 0; m < n_modes; ++m) {
            Mode mode{normal(rng) / static_cast<double>(m + 1), 0.2 + 1.8 * unit(rng),
                      max_frequency * unit(rng), 6.283185307179586 * unit(rng)};
            c.modes_.push_back(mode);
        }
        return c;
    }

    double operator()(double x) const;
    Curve sample(const WeightGrid& grid) const;
    /// Sample and subtract the value at x_max, giving a curve in the
    /// subspace phi(infinity) = 0.
    Curve sample_vanishing(const WeightGrid& grid) const;

   private:
    double level_ = 0.0;
    std::vector<Mode> modes_;
};

}  // namespace hjm
