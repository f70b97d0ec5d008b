#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace hjm {

/// Sample mean with its standard error.
struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n = 0;
};

/// Neumaier-compensated sum; order-dependent only through the input order,
/// which callers keep fixed (path index order).
inline double compensated_sum(std::span<const double> xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

inline McEstimate mc_estimate(std::span<const double> xs) {
    McEstimate e;
    e.n = xs.size();
    if (e.n == 0) return e;
    e.mean = compensated_sum(xs) / static_cast<double>(e.n);
    if (e.n < 2) return e;
    double ss = 0.0, comp = 0.0;
    for (double x : xs) {
        const double d = (x - e.mean) * (x - e.mean);
        const double t = ss + d;
        comp += (ss - t) + d;
        ss = t;
    }
    const double var = (ss + comp) / static_cast<double>(e.n - 1);
    e.standard_error = std::sqrt(var / static_cast<double>(e.n));
    return e;
}

}  // namespace hjm
