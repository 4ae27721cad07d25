#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

namespace wolbachia::numerics {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Rule with `n` points, exact for polynomials of degree 2n-1. Cached per n.
const GaussRule& gauss_legendre(std::size_t n);

template <class Func>
double fixed_gauss(const Func& f, double a, double b, const GaussRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return sum * half;
}

struct QuadOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-300;
    std::size_t max_intervals = 4000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t intervals = 0;
    bool converged = false;
};

/// Globally adaptive Gauss-Legendre quadrature.
///
/// Each panel is integrated with a 10-point rule, and the error is estimated
/// against the two half-panels. The panel with the largest estimate is split
/// until the summed estimate drops below max(abs_tol, rel_tol * |I|).
/// Endpoints are never evaluated, so integrable endpoint blow-ups that stay
/// finite at Gauss nodes are tolerated.
template <class Func>
QuadResult integrate(const Func& f, double a, double b, const QuadOptions& opts = {}) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    const GaussRule& rule = gauss_legendre(10);

    struct Panel {
        double a, b, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto make_panel = [&](double lo, double hi) {
        const double mid = 0.5 * (lo + hi);
        const double whole = fixed_gauss(f, lo, hi, rule);
        const double left = fixed_gauss(f, lo, mid, rule);
        const double right = fixed_gauss(f, mid, hi, rule);
        const double refined = left + right;
        return Panel{lo, hi, refined, std::abs(refined - whole)};
    };

    std::priority_queue<Panel> panels;
    Panel first = make_panel(a, b);
    double total = first.value;
    double total_err = first.error;
    panels.push(first);

    while (true) {
        const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
        if (total_err <= tol) {
            out.converged = true;
            break;
        }
        if (panels.size() >= opts.max_intervals) break;
        Panel worst = panels.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // panel at float resolution
        panels.pop();
        Panel left = make_panel(worst.a, mid);
        Panel right = make_panel(mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }

    // Re-sum from the panels to shed the drift of incremental updates.
    double sum = 0.0, err = 0.0;
    out.intervals = panels.size();
    while (!panels.empty()) {
        sum += panels.top().value;
        err += panels.top().error;
        panels.pop();
    }
    out.value = sign * sum;
    out.error = err;
    return out;
}

/// Composite trapezoid rule on uniformly spaced samples.
inline double trapezoid(std::span<const double> y, double h) {
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * h;
}

}  // namespace wolbachia::numerics
