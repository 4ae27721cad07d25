#include "wolbachia/bubble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "wolbachia/errors.hpp"
#include "wolbachia/numerics/optimize.hpp"
#include "wolbachia/numerics/quadrature.hpp"

namespace wolbachia {

namespace {

constexpr numerics::QuadOptions kTight{.rel_tol = 1e-12, .abs_tol = 1e-300, .max_intervals = 4000};
constexpr double kGoldenTol = 1e-8;
constexpr std::size_t kBracketGrid = 256;
constexpr std::size_t kRhoGrid = 1024;
constexpr std::size_t kAppendixGrid = 4096;
constexpr double kUpperSlack = 1e-12;

void check_level(const ReactionCurve& curve, double alpha) {
    if (!(alpha >= curve.theta_c() && alpha <= curve.theta_plus())) {
        throw Error(ErrorCode::DomainError,
                    "bubble level " + std::to_string(alpha) + " outside [theta_c, theta_plus]");
    }
}

bool at_upper_root(const ReactionCurve& curve, double alpha) {
    return alpha >= curve.theta_plus() - kUpperSlack && curve.f(alpha) <= 1e-14;
}

// F(alpha) - F(alpha - t^2), by Taylor expansion once alpha - t^2 stops resolving t^2.
double gap_below(const ReactionCurve& curve, double alpha, double t) {
    const double t2 = t * t;
    if (t2 < 1e-6 * alpha) {
        const double fa = curve.f(alpha), dfa = curve.df(alpha), d2fa = curve.d2f(alpha);
        return t2 * (fa - 0.5 * dfa * t2 + d2fa * t2 * t2 / 6.0);
    }
    return curve.F_diff(alpha - t2, alpha);
}

// int_omega^alpha g(v, F(alpha) - F(v)) dv. The half next to alpha is written
// in t with v = alpha - t^2, where the integrand is bounded.
template <class G>
double bubble_integral(const ReactionCurve& curve, double alpha, double omega, const G& g) {
    if (omega >= alpha) return 0.0;
    const double split = std::max(omega, 0.5 * alpha);
    const double t_max = std::sqrt(alpha - split);
    auto upper = [&](double t) {
        const double v = alpha - t * t;
        return 2.0 * t * g(v, gap_below(curve, alpha, t));
    };
    double total = numerics::integrate(upper, 0.0, t_max, kTight).value;
    if (split > omega) {
        auto lower = [&](double v) { return g(v, curve.F_diff(v, alpha)); };
        total += numerics::integrate(lower, omega, split, kTight).value;
    }
    return total;
}

double inv_sqrt_gap(double, double gap) { return 1.0 / std::sqrt(gap); }

numerics::BracketedMinimum minimize_span(const ReactionCurve& curve) {
    const double lo = curve.theta_c();
    const double hi = curve.theta_plus();
    std::vector<double> grid(kBracketGrid);
    for (std::size_t i = 0; i < kBracketGrid; ++i) {
        grid[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(kBracketGrid);
    }
    auto span = [&](double a) {
        if (a <= lo || at_upper_root(curve, a)) return std::numeric_limits<double>::infinity();
        return span_integral(curve, a, 0.0);
    };
    return numerics::grid_then_golden(span, grid, lo, hi, kGoldenTol);
}

UniquenessReport uniqueness_at(const ReactionCurve& curve, double alpha_0);

}  // namespace

double BubbleProfile::operator()(double x) const {
    const double r = std::abs(x);
    if (r >= support_radius || samples.empty()) return 0.0;
    auto it = std::upper_bound(samples.begin(), samples.end(), r,
                               [](double value, const ProfileSample& s) { return value < s.radius; });
    if (it == samples.begin()) return samples.front().frequency;
    if (it == samples.end()) return samples.back().frequency;
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double w = (r - a.radius) / (b.radius - a.radius);
    return a.frequency + w * (b.frequency - a.frequency);
}

double span_integral(const ReactionCurve& curve, double alpha, double omega) {
    check_level(curve, alpha);
    if (!(omega >= 0.0 && omega <= alpha)) {
        throw Error(ErrorCode::DomainError, "omega must lie in [0, alpha]");
    }
    if (omega == alpha) return 0.0;
    if (alpha <= curve.theta_c() && omega <= 0.0) {
        throw Error(ErrorCode::DivergentIntegral, "bubble radius diverges at alpha = theta_c");
    }
    if (at_upper_root(curve, alpha)) {
        throw Error(ErrorCode::DivergentIntegral, "bubble radius diverges at a zero of f");
    }
    return bubble_integral(curve, alpha, omega, inv_sqrt_gap);
}

double chi(const ReactionCurve& curve, double alpha, double omega, double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    return std::sqrt(sigma / 2.0) * span_integral(curve, alpha, omega);
}

double bubble_radius_1d(const ReactionCurve& curve, double alpha, double sigma) {
    return chi(curve, alpha, 0.0, sigma);
}

BubbleProfile bubble_profile(const ReactionCurve& curve, double alpha, double sigma, std::size_t n_samples) {
    if (n_samples < 2) throw Error(ErrorCode::InvalidArgument, "a profile needs at least 2 samples");
    check_level(curve, alpha);
    if (alpha <= curve.theta_c()) throw Error(ErrorCode::DivergentIntegral, "alpha must exceed theta_c");
    if (at_upper_root(curve, alpha)) throw Error(ErrorCode::DivergentIntegral, "alpha must be below theta_plus");

    BubbleProfile profile;
    profile.alpha = alpha;
    profile.sigma = sigma;
    profile.samples.resize(n_samples);
    const double scale = std::sqrt(sigma / 2.0);
    const double t_end = std::sqrt(alpha);
    auto integrand = [&](double t) {
        return 2.0 * t / std::sqrt(gap_below(curve, alpha, std::min(t, t_end)));
    };
    double radius = 0.0;
    double t_prev = 0.0;
    profile.samples[0] = {0.0, alpha};
    for (std::size_t j = 1; j < n_samples; ++j) {
        const double t = t_end * static_cast<double>(j) / static_cast<double>(n_samples - 1);
        radius += scale * numerics::integrate(integrand, t_prev, t, kTight).value;
        const double freq = j + 1 == n_samples ? 0.0 : alpha - t * t;
        profile.samples[j] = {radius, freq};
        t_prev = t;
    }
    profile.support_radius = radius;
    return profile;
}

GroundState::GroundState(const ReactionCurve& curve, double sigma) : curve_(&curve), sigma_(sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    const double slope = curve.df(0.0);
    if (!(slope < 0.0)) throw Error(ErrorCode::NotBistable, "f'(0) must be negative for a decaying ground state");
    rate_ = std::sqrt(-slope / sigma);
    u_switch_ = 1e-4 * curve.theta_c();
    x_switch_ = chi(curve, curve.theta_c(), u_switch_, sigma);
}

double GroundState::operator()(double x) const {
    x = std::abs(x);
    const double top = curve_->theta_c();
    if (x == 0.0) return top;
    if (x >= x_switch_) return u_switch_ * std::exp(-rate_ * (x - x_switch_));
    // chi is decreasing in omega; bisect in log(omega).
    auto gap = [&](double log_omega) { return chi(*curve_, top, std::exp(log_omega), sigma_) - x; };
    const double y = numerics::bisect(gap, std::log(u_switch_), std::log(top), 1e-14);
    return std::exp(y);
}

double ground_state(const ReactionCurve& curve, double sigma, double x) { return GroundState(curve, sigma)(x); }

double energy(std::span<const double> field, const UniformGrid& grid, const ReactionCurve& curve, double sigma) {
    if (grid.nodes < 3) throw Error(ErrorCode::GridTooCoarse, "energy needs at least 3 nodes per axis");
    if (field.size() != grid.size()) throw Error(ErrorCode::InvalidArgument, "field size does not match grid");
    const std::size_t n = grid.nodes;
    const double h = grid.dx();
    auto weight = [&](std::size_t i) { return (i == 0 || i + 1 == n) ? 0.5 * h : h; };
    auto derivative = [&](auto at, std::size_t i) {
        if (i == 0) return (at(1) - at(0)) / h;
        if (i + 1 == n) return (at(n - 1) - at(n - 2)) / h;
        return (at(i + 1) - at(i - 1)) / (2.0 * h);
    };

    double total = 0.0;
    if (grid.dimension == 1) {
        auto at = [&](std::size_t i) { return field[i]; };
        for (std::size_t i = 0; i < n; ++i) {
            const double g = derivative(at, i);
            total += weight(i) * (0.5 * sigma * g * g - curve.F(field[i]));
        }
        return total;
    }
    if (grid.dimension != 2) throw Error(ErrorCode::InvalidArgument, "energy supports dimensions 1 and 2");
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            auto along_x = [&](std::size_t k) { return field[j * n + k]; };
            auto along_y = [&](std::size_t k) { return field[k * n + i]; };
            const double gx = derivative(along_x, i);
            const double gy = derivative(along_y, j);
            const double u = field[j * n + i];
            total += weight(i) * weight(j) * (0.5 * sigma * (gx * gx + gy * gy) - curve.F(u));
        }
    }
    return total;
}

double bubble_energy_1d(const ReactionCurve& curve, double alpha, double sigma) {
    check_level(curve, alpha);
    if (at_upper_root(curve, alpha)) return -std::numeric_limits<double>::infinity();
    // F(alpha) - 2 F(v) = gap - F(v); at alpha = theta_c this is the limiting sqrt(-2F) form.
    auto integrand = [&](double v, double gap) { return (gap - curve.F(v)) / std::sqrt(2.0 * gap); };
    return 2.0 * std::sqrt(sigma) * bubble_integral(curve, alpha, 0.0, integrand);
}

double potential_V(const ReactionCurve& curve, double alpha) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::DomainError, "alpha must be positive");
    const auto q = numerics::integrate([&](double x) { return curve.F(x); }, 0.0, alpha, kTight);
    return q.value / alpha;
}

double potential_U(const ReactionCurve& curve, double alpha) { return curve.F(alpha) - potential_V(curve, alpha); }

double energy_radius_closed_form_1d(const ReactionCurve& curve, double alpha, double sigma) {
    const double Fa = curve.F(alpha);
    if (!(Fa > 0.0)) throw Error(ErrorCode::DomainError, "closed-form radius needs F(alpha) > 0");
    return 2.0 * std::sqrt(sigma) * alpha * std::sqrt(potential_U(curve, alpha)) / Fa;
}

double rho_star_1d(const ReactionCurve& curve, double alpha) {
    const double V = potential_V(curve, alpha);
    const double U = curve.F(alpha) - V;
    return 0.5 - V / (2.0 * U);
}

RadiusEstimate energy_radius(const ReactionCurve& curve, double alpha, double sigma, int dimension) {
    if (dimension < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    check_level(curve, alpha);
    if (alpha <= curve.theta_c()) throw Error(ErrorCode::DomainError, "energy radius needs alpha > theta_c");

    const double d = static_cast<double>(dimension);
    auto weighted_mass = [&](double rho) {
        auto integrand = [&](double x) { return std::pow(1.0 - (1.0 - rho) * x / alpha, d) * curve.f(x); };
        return numerics::integrate(integrand, 0.0, alpha, kTight).value;
    };
    auto radius = [&](double rho) {
        if (!(rho > 0.0 && rho < 1.0)) return std::numeric_limits<double>::infinity();
        const double q = weighted_mass(rho);
        if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
        const double num = sigma * alpha * alpha * (1.0 - std::pow(rho, d));
        return std::sqrt(num / ((1.0 - rho) * (1.0 - rho) * q));
    };

    std::vector<double> grid(kRhoGrid);
    for (std::size_t i = 0; i < kRhoGrid; ++i) {
        grid[i] = static_cast<double>(i + 1) / static_cast<double>(kRhoGrid + 1);
    }
    auto best = numerics::grid_then_golden(radius, grid, 0.0, 1.0, kGoldenTol);
    if (!std::isfinite(best.minimum.value)) {
        const double near_one = 1.0 - 1e-6;
        const double r = radius(near_one);
        if (!std::isfinite(r)) throw Error(ErrorCode::EmptyFeasibleSet, "no rho with positive weighted mass");
        best.minimum = {near_one, r};
    }
    return RadiusEstimate{alpha, dimension, best.minimum.value, best.minimum.x, true};
}

double g_function(const ReactionCurve& curve, double x) {
    if (x == 0.0) return 1.0;
    return x * curve.df(x) / curve.f(x);
}

double h_function(const ReactionCurve& curve, double alpha) {
    if (!(alpha > curve.theta_c() && alpha < curve.theta_plus())) {
        throw Error(ErrorCode::DomainError, "h is defined on (theta_c, theta_plus)");
    }
    const double fa = curve.f(alpha);
    const double dfa = curve.df(alpha);
    const double d2fa = curve.d2f(alpha);
    const auto& rule = numerics::gauss_legendre(16);
    // w = 1 - s^2. r(s) = (F(alpha) - F(alpha w)) / (alpha f(alpha) s^2) -> 1 at s = 0,
    // and the integrand is 2 s^-2 (1 - r^-3/2), bounded at s = 0.
    auto integrand = [&](double s) {
        const double s2 = s * s;
        double r_minus_1;
        if (s < 1e-3) {
            r_minus_1 = -(alpha * dfa / (2.0 * fa)) * s2 + (alpha * alpha * d2fa / (6.0 * fa)) * s2 * s2;
        } else if (s < 0.1) {
            const double lo = alpha * (1.0 - s2);
            const double excess = numerics::fixed_gauss([&](double x) { return curve.f(x) - fa; }, lo, alpha, rule);
            r_minus_1 = excess / (alpha * fa * s2);
        } else {
            r_minus_1 = curve.F_diff(alpha * (1.0 - s2), alpha) / (alpha * fa * s2) - 1.0;
        }
        return -2.0 / s2 * std::expm1(-1.5 * std::log1p(r_minus_1));
    };
    return numerics::integrate(integrand, 0.0, 1.0, kTight).value;
}

namespace {

UniquenessReport uniqueness_at(const ReactionCurve& curve, double alpha_0) {
    UniquenessReport rep;
    const double theta = curve.theta();
    const double theta_c = curve.theta_c();
    const double top = curve.theta_plus();

    rep.b0_ok = curve.df(0.0) < 0.0 && curve.df(theta) > 0.0 && curve.df(top) < 0.0;
    rep.b1_ok = curve.F(top) > 0.0;

    rep.b2_ok = true;
    for (std::size_t i = 0; i <= kAppendixGrid; ++i) {
        const double x = top * static_cast<double>(i) / static_cast<double>(kAppendixGrid);
        const double fx = curve.f(x), dfx = curve.df(x), d2fx = curve.d2f(x);
        const double lhs = (dfx + x * d2fx) * fx;
        const double rhs = x * dfx * dfx;
        if (lhs > rhs + 1e-12 * (std::abs(lhs) + std::abs(rhs)) + 1e-15) rep.b2_ok = false;
    }

    for (std::size_t i = 0; i <= 512; ++i) {
        const double x = top * static_cast<double>(i) / 512.0;
        if (std::abs(x - theta) < 1e-6 || std::abs(x - top) < 1e-9) continue;
        rep.g_samples.push_back({x, g_function(curve, x)});
    }
    try {
        rep.alpha_1 = numerics::bisect([&](double a) { return g_function(curve, a) - 1.0; }, theta + 1e-9,
                                       top - 1e-9);
    } catch (const Error&) {
        rep.alpha_1 = std::numeric_limits<double>::quiet_NaN();
    }

    rep.b3_ok = true;
    const double b3_lo = std::isnan(rep.alpha_1) ? theta_c : std::max(theta_c, rep.alpha_1);
    for (std::size_t i = 1; i <= kAppendixGrid; ++i) {
        const double a = b3_lo + (top - b3_lo) * static_cast<double>(i) / static_cast<double>(kAppendixGrid);
        const double fa = curve.f(a);
        const double lhs = curve.F(a) * (fa + a * curve.df(a));
        const double rhs = a * fa * fa;
        if (lhs > rhs + 1e-12 * (std::abs(lhs) + std::abs(rhs)) + 1e-15) rep.b3_ok = false;
    }

    std::vector<double> xs = {1e-7, 1e-6, 1e-5, 1e-4, 1e-3};
    for (int j = 1; j < 64; ++j) xs.push_back(0.5 * (1.0 - std::cos(std::numbers::pi * j / 64.0)));
    for (double e : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7}) xs.push_back(1.0 - e);
    std::sort(xs.begin(), xs.end());
    for (double x : xs) {
        const double a = theta_c + (top - theta_c) * x;
        rep.h_samples.push_back({a, h_function(curve, a)});
    }
    rep.h_increasing = true;
    rep.h_crossings = 0;
    for (std::size_t i = 1; i < rep.h_samples.size(); ++i) {
        if (!(rep.h_samples[i].frequency > rep.h_samples[i - 1].frequency)) rep.h_increasing = false;
        if ((rep.h_samples[i].frequency + 2.0 > 0.0) != (rep.h_samples[i - 1].frequency + 2.0 > 0.0)) {
            ++rep.h_crossings;
        }
    }
    rep.alpha_0 = alpha_0;
    rep.h_at_alpha0 = h_function(curve, alpha_0);
    return rep;
}

}  // namespace

UniquenessReport check_uniqueness(const ReactionCurve& curve) {
    return uniqueness_at(curve, minimize_span(curve).minimum.x);
}

MinimalRadius min_bubble_radius(const ReactionCurve& curve, double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    const auto found = minimize_span(curve);
    MinimalRadius out;
    out.alpha_0 = found.minimum.x;
    out.radius = std::sqrt(sigma / 2.0) * found.minimum.value;
    out.multiple_minima_suspected = found.grid_local_minima > 1;

    const UniquenessReport rep = uniqueness_at(curve, out.alpha_0);
    if (rep.all_hold()) {
        auto shifted = [&](double a) { return h_function(curve, a) + 2.0; };
        const double lo_lim = curve.theta_c() + 1e-9;
        const double hi_lim = curve.theta_plus() - 1e-9;
        double step = 1e-3;
        for (int attempt = 0; attempt < 30; ++attempt, step *= 2.0) {
            const double lo = std::max(lo_lim, out.alpha_0 - step);
            const double hi = std::min(hi_lim, out.alpha_0 + step);
            if ((shifted(lo) < 0.0) != (shifted(hi) < 0.0)) {
                out.alpha_from_h = numerics::bisect(shifted, lo, hi, 1e-13);
                break;
            }
        }
    }
    return out;
}

}  // namespace wolbachia
