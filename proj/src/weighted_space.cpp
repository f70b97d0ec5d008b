#include "hjm/weighted_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hjm {

WeightGrid::WeightGrid(std::vector<double> nodes, double beta) : nodes_(std::move(nodes)), beta_(beta) {
    if (nodes_.size() < 3)
        throw std::invalid_argument("WeightGrid: need at least 3 nodes");
    if (nodes_.front() != 0.0)
        throw std::invalid_argument("WeightGrid: first node must be 0");
    if (!(beta_ > 0.0))
        throw std::invalid_argument("WeightGrid: weight exponent beta must be positive");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1]))
            throw std::invalid_argument("WeightGrid: nodes must be strictly increasing");

    const std::size_t n = nodes_.size();
    quad_weights_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = nodes_[i + 1] - nodes_[i];
        quad_weights_[i] += 0.5 * h;
        quad_weights_[i + 1] += 0.5 * h;
    }
    alpha_.resize(n);
    for (std::size_t i = 0; i < n; ++i) alpha_[i] = std::exp(beta_ * nodes_[i]);

    const double h0 = nodes_[1] - nodes_[0];
    uniform_ = true;
    for (std::size_t i = 1; i < n; ++i) {
        const double expected = h0 * static_cast<double>(i);
        if (std::abs(nodes_[i] - expected) > 1e-12 * std::max(1.0, expected)) {
            uniform_ = false;
            break;
        }
    }
    spacing_ = uniform_ ? x_max() / static_cast<double>(n - 1) : 0.0;
}

double WeightGrid::alpha_at(double x) const { return std::exp(beta_ * x); }

std::ptrdiff_t WeightGrid::aligned_offset(double t) const {
    if (!uniform_) return -1;
    const double steps = t / spacing_;
    const double k = std::round(steps);
    if (std::abs(steps - k) > 1e-9 * std::max(1.0, k)) return -1;
    return static_cast<std::ptrdiff_t>(k);
}

WeightGrid make_grid(double x_max, std::size_t n_points, double beta) {
    if (!(x_max > 0.0)) throw std::invalid_argument("make_grid: x_max must be positive");
    if (n_points < 3) throw std::invalid_argument("make_grid: n_points must be at least 3");
    if (!(beta > 0.0)) throw std::invalid_argument("make_grid: beta must be positive");
    std::vector<double> nodes(n_points);
    const double h = x_max / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) nodes[i] = h * static_cast<double>(i);
    nodes.back() = x_max;
    return WeightGrid(std::move(nodes), beta);
}

// --- Curve arithmetic ---

namespace {
void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": size mismatch");
}
void require_on_grid(std::size_t n, const WeightGrid& grid) {
    if (n != grid.size()) throw std::invalid_argument("curve does not match grid size");
}
}  // namespace

Curve& Curve::operator+=(const Curve& other) {
    require_same_size(size(), other.size(), "Curve +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Curve& Curve::operator-=(const Curve& other) {
    require_same_size(size(), other.size(), "Curve -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Curve& Curve::operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
}

Curve operator+(Curve a, const Curve& b) { return a += b; }
Curve operator-(Curve a, const Curve& b) { return a -= b; }
Curve operator*(double a, Curve c) { return c *= a; }

VectorCurve::VectorCurve(std::size_t dimension, std::size_t n_nodes, double fill)
    : dimension_(dimension), n_nodes_(n_nodes), values_(dimension * n_nodes, fill) {}

VectorCurve VectorCurve::from_components(const std::vector<Curve>& components) {
    if (components.empty()) throw std::invalid_argument("VectorCurve: no components");
    VectorCurve v(components.size(), components.front().size());
    for (std::size_t k = 0; k < components.size(); ++k) {
        require_same_size(components[k].size(), v.n_nodes_, "VectorCurve::from_components");
        std::copy(components[k].values().begin(), components[k].values().end(), v.component(k).begin());
    }
    return v;
}

std::span<const double> VectorCurve::component(std::size_t k) const {
    return std::span<const double>(values_).subspan(k * n_nodes_, n_nodes_);
}

std::span<double> VectorCurve::component(std::size_t k) {
    return std::span<double>(values_).subspan(k * n_nodes_, n_nodes_);
}

VectorCurve& VectorCurve::operator-=(const VectorCurve& other) {
    require_same_size(values_.size(), other.values_.size(), "VectorCurve -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

// --- Calculus ---

namespace {
// Derivative at a of the quadratic through (a, ua), (a+h1, ub), (a+h1+h2, uc);
// h1, h2 negative for the right endpoint.
inline double one_sided(double ua, double ub, double uc, double h1, double h2) {
    const double h12 = h1 + h2;
    return -(h1 + h12) / (h1 * h12) * ua + h12 / (h1 * h2) * ub - h1 / (h2 * h12) * uc;
}

// Centered in the interior; second-order one-sided at the two ends (grids have >= 3 nodes).
inline double fd_at(std::span<const double> u, std::span<const double> x, std::size_t i) {
    const std::size_t n = u.size();
    if (i == 0) return one_sided(u[0], u[1], u[2], x[1] - x[0], x[2] - x[1]);
    if (i == n - 1)
        return one_sided(u[n - 1], u[n - 2], u[n - 3], x[n - 2] - x[n - 1], x[n - 3] - x[n - 2]);
    return (u[i + 1] - u[i - 1]) / (x[i + 1] - x[i - 1]);
}
}  // namespace

std::vector<double> derivative(std::span<const double> values, const WeightGrid& grid) {
    require_on_grid(values.size(), grid);
    std::vector<double> d(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) d[i] = fd_at(values, grid.nodes(), i);
    return d;
}

double weighted_seminorm_sq(std::span<const double> values, const WeightGrid& grid) {
    require_on_grid(values.size(), grid);
    const auto x = grid.nodes();
    const auto w = grid.quad_weights();
    const auto a = grid.alpha();
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = fd_at(values, x, i);
        s += w[i] * a[i] * d * d;
    }
    return s;
}

double integrate(std::span<const double> values, const WeightGrid& grid) {
    require_on_grid(values.size(), grid);
    const auto w = grid.quad_weights();
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i];
    return s;
}

void cumulative_integral(std::span<const double> values, const WeightGrid& grid, std::span<double> out) {
    require_on_grid(values.size(), grid);
    require_same_size(values.size(), out.size(), "cumulative_integral");
    const auto x = grid.nodes();
    out[0] = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (values[i] + values[i - 1]);
}

namespace {
// Index of the cell [x_j, x_{j+1}] containing x, for 0 <= x < x_max.
std::size_t cell_index(const WeightGrid& grid, double x) {
    const auto nodes = grid.nodes();
    std::size_t j;
    if (grid.uniform()) {
        j = static_cast<std::size_t>(x / grid.spacing());
        j = std::min(j, nodes.size() - 2);
        // guard against rounding on either side of a node
        while (j > 0 && nodes[j] > x) --j;
        while (j + 2 < nodes.size() && nodes[j + 1] <= x) ++j;
    } else {
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        j = static_cast<std::size_t>(std::distance(nodes.begin(), it)) - 1;
        j = std::min(j, nodes.size() - 2);
    }
    return j;
}
}  // namespace

double interpolate(std::span<const double> values, const WeightGrid& grid, double x) {
    require_on_grid(values.size(), grid);
    if (x <= 0.0) return values.front();
    if (x >= grid.x_max()) return values.back();
    const auto nodes = grid.nodes();
    const std::size_t j = cell_index(grid, x);
    const double w = (x - nodes[j]) / (nodes[j + 1] - nodes[j]);
    return values[j] + w * (values[j + 1] - values[j]);
}

double integral_to(std::span<const double> values, const WeightGrid& grid, double x) {
    require_on_grid(values.size(), grid);
    if (x < 0.0) throw std::invalid_argument("integral_to: negative upper limit");
    const auto nodes = grid.nodes();
    const double x_end = std::min(x, grid.x_max());
    double s = 0.0;
    std::size_t j = 0;
    for (; j + 1 < nodes.size() && nodes[j + 1] <= x_end; ++j)
        s += 0.5 * (nodes[j + 1] - nodes[j]) * (values[j] + values[j + 1]);
    if (j + 1 < nodes.size() && x_end > nodes[j]) {
        const double v_end = interpolate(values, grid, x_end);
        s += 0.5 * (x_end - nodes[j]) * (values[j] + v_end);
    }
    if (x > grid.x_max()) s += (x - grid.x_max()) * values.back();
    return s;
}

double norm_H(std::span<const double> values, const WeightGrid& grid) {
    const double s = weighted_seminorm_sq(values, grid) + values[0] * values[0];
    return std::sqrt(s);
}

double norm_H(const Curve& curve, const WeightGrid& grid) { return norm_H(curve.values(), grid); }

double norm_star(std::span<const double> values, const WeightGrid& grid) {
    const double tail = values.back();
    return std::sqrt(weighted_seminorm_sq(values, grid) + tail * tail);
}

double norm_star(const Curve& curve, const WeightGrid& grid) { return norm_star(curve.values(), grid); }

double norm_frak_H(const VectorCurve& vcurve, const WeightGrid& grid) {
    require_on_grid(vcurve.n_nodes(), grid);
    double s = 0.0;
    for (std::size_t k = 0; k < vcurve.dimension(); ++k) {
        const auto c = vcurve.component(k);
        s += c[0] * c[0] + weighted_seminorm_sq(c, grid);
    }
    return std::sqrt(s);
}

void shift_into(std::span<const double> in, double t, const WeightGrid& grid, std::span<double> out) {
    require_on_grid(in.size(), grid);
    require_same_size(in.size(), out.size(), "shift_into");
    if (t < 0.0) throw std::invalid_argument("shift: negative shift");
    const std::size_t n = in.size();
    const std::ptrdiff_t k = grid.aligned_offset(t);
    if (k >= 0) {
        const auto ku = static_cast<std::size_t>(k);
        for (std::size_t i = 0; i < n; ++i) out[i] = in[std::min(i + ku, n - 1)];
        return;
    }
    const auto nodes = grid.nodes();
    for (std::size_t i = 0; i < n; ++i) out[i] = interpolate(in, grid, nodes[i] + t);
}

Curve shift(const Curve& curve, double t, const WeightGrid& grid) {
    Curve out(curve.size(), 0.0);
    shift_into(curve.values(), t, grid, out.values());
    return out;
}

EmbeddingRatios check_embeddings(const Curve& curve, const WeightGrid& grid) {
    const double h = norm_H(curve, grid);
    if (!(h > 0.0)) throw std::domain_error("check_embeddings: ratios undefined for the zero curve");
    const auto u = curve.values();
    const double tail = u.back();
    const auto w = grid.quad_weights();
    const auto a = grid.alpha();
    double sup = 0.0, l1 = 0.0, quartic = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        sup = std::max(sup, std::abs(u[i]));
        const double c = u[i] - tail;
        l1 += w[i] * std::abs(c);
        quartic += w[i] * a[i] * c * c * c * c;
    }
    return {sup / h, l1 / h, std::sqrt(quartic) / (h * h)};
}

double RandomSmoothCurve::operator()(double x) const {
    double v = level_;
    for (const Mode& m : modes_) v += m.amplitude * std::exp(-m.decay * x) * std::cos(m.frequency * x + m.phase);
    return v;
}

Curve RandomSmoothCurve::sample(const WeightGrid& grid) const {
    Curve c(grid.size(), 0.0);
    const auto nodes = grid.nodes();
    for (std::size_t i = 0; i < grid.size(); ++i) c[i] = (*this)(nodes[i]);
    return c;
}

Curve RandomSmoothCurve::sample_vanishing(const WeightGrid& grid) const {
    Curve c = sample(grid);
    const double tail = c.back();
    for (double& v : c.values()) v -= tail;
    c[c.size() - 1] = 0.0;
    return c;
}

}  // namespace hjm
