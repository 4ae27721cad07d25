#include "wolbachia/release.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wolbachia/bubble.hpp"
#include "wolbachia/errors.hpp"
#include "wolbachia/numerics/optimize.hpp"
#include "wolbachia/rng.hpp"

namespace wolbachia {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLowestP = 1e-6;
constexpr std::size_t kJGrid = 512;
constexpr std::size_t kAlphaGrid = 64;
constexpr std::size_t kNecSamples = 512;
constexpr double kGoldenTol = 1e-8;

double log_odds(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

double ReleaseProfile::density(double x, double y) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double v = variances[i];
        const double dx = x - centers[i][0];
        double r2 = dx * dx;
        double norm = std::sqrt(kTwoPi * v);
        if (dimension == 2) {
            const double dy = y - centers[i][1];
            r2 += dy * dy;
            norm = kTwoPi * v;
        }
        sum += std::exp(-r2 / (2.0 * v)) / norm;
    }
    return per_site_mass * sum;
}

ReleaseProfile sample_release_profile(const ReleaseSampling& spec, std::uint64_t seed) {
    if (!(spec.box_half_width > 0.0)) throw Error(ErrorCode::InvalidBox, "box half-width must be positive");
    if (spec.k < 1) throw Error(ErrorCode::InvalidArgument, "need at least one release");
    if (!(spec.total_mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "release mass must be positive");
    if (!(spec.sigma0 > 0.0) || !(spec.epsilon >= 0.0) || !(spec.epsilon < spec.sigma0)) {
        throw Error(ErrorCode::InvalidArgument, "need 0 <= epsilon < sigma0");
    }
    if (spec.dimension != 1 && spec.dimension != 2) throw Error(ErrorCode::InvalidArgument, "dimension must be 1 or 2");
    if (!(spec.background > 0.0)) throw Error(ErrorCode::InvalidArgument, "N0 must be positive");

    auto gen = derive_stream(seed, 0);
    ReleaseProfile out;
    out.dimension = spec.dimension;
    out.box_half_width = spec.box_half_width;
    out.per_site_mass = spec.total_mass / static_cast<double>(spec.k);
    out.background = spec.background;
    out.centers.resize(spec.k, {0.0, 0.0});
    out.variances.resize(spec.k);
    const double L = spec.box_half_width;
    for (std::size_t i = 0; i < spec.k; ++i) {
        out.centers[i][0] = uniform(gen, -L, L);
        if (spec.dimension == 2) out.centers[i][1] = uniform(gen, -L, L);
        out.variances[i] = uniform(gen, spec.sigma0 - spec.epsilon, spec.sigma0 + spec.epsilon);
    }
    return out;
}

double initial_frequency(const ReleaseProfile& profile, double x, double y) {
    const double X = profile.density(x, y);
    return X / (X + profile.background);
}

NecWitness check_nec(const std::function<double(double)>& p0, const ReactionCurve& curve, double sigma,
                     const std::vector<double>& alpha_grid, const std::vector<double>& shift_grid) {
    NecWitness none;
    if (alpha_grid.empty() || shift_grid.empty()) return none;
    for (double alpha : alpha_grid) {
        const BubbleProfile bubble = bubble_profile(curve, alpha, sigma, kNecSamples);
        const auto& s = bubble.samples;
        for (double shift : shift_grid) {
            // The bubble sits at x = -shift in the release coordinate.
            const double centre = -shift;
            bool ok = true;
            for (std::size_t j = 0; j < s.size() && ok; ++j) {
                const double need = s[j].frequency;
                ok = p0(centre + s[j].radius) >= need && p0(centre - s[j].radius) >= need;
            }
            if (ok) return {true, alpha, shift};
        }
    }
    return none;
}

NecWitness check_nec(const ReleaseProfile& profile, const ReactionCurve& curve, double sigma,
                     const std::vector<double>& alpha_grid, const std::vector<double>& shift_grid) {
    if (profile.dimension != 1) throw Error(ErrorCode::InvalidArgument, "NEC check is one-dimensional");
    return check_nec([&](double x) { return initial_frequency(profile, x); }, curve, sigma, alpha_grid,
                     shift_grid);
}

std::vector<double> default_nec_alpha_grid(const ReactionCurve& curve) {
    const double lo = curve.theta_c();
    const double width = curve.theta_plus() - lo;
    std::vector<double> grid(kAlphaGrid);
    // Offsets from theta_c run geometrically from 1e-3 to (1 - 1e-6) of the width.
    const double first = 1e-3, last = 1.0 - 1e-6;
    const double ratio = std::pow(last / first, 1.0 / static_cast<double>(kAlphaGrid - 1));
    double off = first;
    for (std::size_t i = 0; i < kAlphaGrid; ++i, off *= ratio) grid[i] = lo + width * std::min(off, last);
    return grid;
}

std::vector<double> default_nec_shift_grid(const ReleaseProfile& profile, double step) {
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "shift step must be positive");
    std::vector<double> grid;
    if (profile.centers.empty()) return grid;
    double lo = profile.centers.front()[0], hi = lo;
    for (const auto& c : profile.centers) {
        lo = std::min(lo, c[0]);
        hi = std::max(hi, c[0]);
        grid.push_back(-c[0]);
    }
    for (double x = lo; x <= hi; x += step) grid.push_back(-x);
    return grid;
}

double j_alpha(const ReactionCurve& curve, double alpha, double p) {
    if (!(p > 0.0 && p <= alpha && alpha < 1.0)) throw Error(ErrorCode::DomainError, "need 0 < p <= alpha < 1");
    const double half = 0.5 * span_integral(curve, alpha, p);
    return log_odds(p) + half * half;
}

double j_alpha_derivative(const ReactionCurve& curve, double alpha, double p) {
    if (!(p > 0.0 && p < alpha)) throw Error(ErrorCode::DomainError, "need 0 < p < alpha");
    const double S = span_integral(curve, alpha, p);
    return 1.0 / (p * (1.0 - p)) - S / (2.0 * std::sqrt(curve.F_diff(p, alpha)));
}

JMax j_alpha_max(const ReactionCurve& curve, double alpha) {
    // With sigma = 2 the profile radius is the span integral itself.
    const BubbleProfile prof = bubble_profile(curve, alpha, 2.0, kJGrid);
    std::vector<double> ps, js;
    for (std::size_t j = 0; j + 1 < prof.samples.size(); ++j) {
        const double p = prof.samples[j].frequency;
        if (p <= kLowestP) break;
        const double half = 0.5 * prof.samples[j].radius;
        ps.push_back(p);
        js.push_back(log_odds(p) + half * half);
    }
    // Log-spaced tail towards kLowestP, below the reach of the profile grid.
    const double p_floor = ps.back();
    for (int i = 1; i <= 32; ++i) {
        const double p = p_floor * std::pow(kLowestP / p_floor, i / 32.0);
        ps.push_back(p);
        js.push_back(j_alpha(curve, alpha, p));
    }
    const auto best = static_cast<std::size_t>(std::max_element(js.begin(), js.end()) - js.begin());
    if (best == 0) return {alpha, js[0]};
    const double hi = ps[best - 1];
    const double lo = best + 1 < ps.size() ? ps[best + 1] : kLowestP;
    auto neg = [&](double p) { return -j_alpha(curve, alpha, p); };
    const auto m = numerics::golden_section(neg, lo, hi, kGoldenTol * std::max(1e-6, ps[best]));
    if (-m.value >= js[best]) return {m.x, -m.value};
    return {ps[best], js[best]};
}

double SingleReleaseSolution::minimal_release(double sigma_plus) const {
    return background * std::sqrt(kTwoPi * sigma_plus) * std::exp(j_star);
}

double SingleReleaseSolution::max_diffusivity(double N) const {
    const double r = N / background;
    return std::exp(-2.0 * j_star) * r * r / kTwoPi;
}

SingleReleaseSolution single_release_threshold(const ReactionCurve& curve, double N0) {
    if (!(N0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "N0 must be positive");
    const double lo = curve.theta_c();
    const double hi = std::min(curve.theta_plus(), 1.0 - 1e-9);
    std::vector<double> grid(kAlphaGrid);
    for (std::size_t i = 0; i < kAlphaGrid; ++i) {
        grid[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(kAlphaGrid);
    }
    auto j_of = [&](double a) {
        if (a <= lo || a >= hi) return std::numeric_limits<double>::infinity();
        return j_alpha_max(curve, a).value;
    };
    const auto found = numerics::grid_then_golden(j_of, grid, lo, hi, kGoldenTol);
    SingleReleaseSolution out;
    out.alpha_star = found.minimum.x;
    out.j_star = found.minimum.value;
    out.p_star = j_alpha_max(curve, out.alpha_star).p;
    out.background = N0;
    return out;
}

SpacingSolution equally_spaced_requirement(const ReactionCurve& curve, std::size_t k, double sigma, double N0) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "equally spaced releases need k >= 2");
    if (!(sigma > 0.0) || !(N0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma and N0 must be positive");
    const double lo = curve.theta_c();
    const double hi = std::min(curve.theta_plus(), 1.0 - 1e-9);
    const double gaps = static_cast<double>(k - 1);
    auto log_j = [&](double a) {
        if (a <= lo || a >= hi) return std::numeric_limits<double>::infinity();
        const double L = bubble_radius_1d(curve, a, sigma);
        return log_odds(a) + L * L / (2.0 * sigma * gaps * gaps);
    };
    std::vector<double> grid(256);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(grid.size());
    }
    const auto found = numerics::grid_then_golden(log_j, grid, lo, hi, kGoldenTol);
    SpacingSolution out;
    out.k = k;
    out.alpha_opt = found.minimum.x;
    out.j_star_k = std::exp(found.minimum.value);
    out.n_tilde_star = N0 * std::sqrt(kTwoPi * sigma) * 0.5 * static_cast<double>(k) * out.j_star_k;
    return out;
}

}  // namespace wolbachia
