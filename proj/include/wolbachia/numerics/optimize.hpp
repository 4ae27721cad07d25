#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "wolbachia/errors.hpp"

namespace wolbachia::numerics {

struct Minimum {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section search for a unimodal function on [a, b].
template <class Func>
Minimum golden_section(const Func& f, double a, double b, double x_tol = 1e-8) {
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (std::abs(b - a) > x_tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
}

struct BracketedMinimum {
    Minimum minimum;
    /// Number of strict local minima seen on the coarse grid.
    std::size_t grid_local_minima = 0;
};

/// Coarse scan over the given abscissae followed by golden-section refinement
/// between the neighbours of the best grid point. Non-finite values count as +inf.
template <class Func>
BracketedMinimum grid_then_golden(const Func& f, const std::vector<double>& grid, double lo, double hi,
                                  double x_tol = 1e-8) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty search grid");
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = f(grid[i]);
        vals[i] = std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (vals[i] < vals[best]) best = i;
    }
    BracketedMinimum out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool left_ok = i == 0 || vals[i] < vals[i - 1];
        const bool right_ok = i + 1 == grid.size() || vals[i] < vals[i + 1];
        if (left_ok && right_ok) ++out.grid_local_minima;
    }
    const double a = best == 0 ? lo : grid[best - 1];
    const double b = best + 1 == grid.size() ? hi : grid[best + 1];
    Minimum refined = golden_section(
        [&](double x) {
            const double v = f(x);
            return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        },
        a, b, x_tol);
    out.minimum = refined.value <= vals[best] ? refined : Minimum{grid[best], vals[best]};
    return out;
}

/// Bisection on a sign change. Runs until the bracket cannot shrink further
/// or its width falls below `x_tol`.
template <class Func>
double bisect(const Func& f, double a, double b, double x_tol = 0.0) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa < 0.0) == (fb < 0.0)) {
        throw Error(ErrorCode::RootBracketingFailed, "no sign change on the bracket");
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double m = 0.5 * (a + b);
        if (!(m > a && m < b) || std::abs(b - a) <= x_tol) break;
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

}  // namespace wolbachia::numerics
