#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "wolbachia/bubble.hpp"
#include "wolbachia/errors.hpp"
#include "wolbachia/release.hpp"

using namespace wolbachia;
using std::numbers::pi;

namespace {
const ReactionCurve& field_curve() {
    static const ReactionCurve c = build_reaction(ReactionParams{});
    return c;
}

// max over p of J_alpha, with I(p) accumulated by Simpson along v = alpha - t^2.
double j_alpha_oracle(const ReactionCurve& c, double a) {
    const int n = 8000;
    const double T = std::sqrt(a), h = T / n;
    auto g = [&](double t) {
        if (t * t < 1e-9 * a) return 1.0 / std::sqrt(c.f(a));
        return t / std::sqrt(c.F_diff(a - t * t, a));
    };
    double best = -1e300, I = 0.0;
    double gp = g(0.0);
    for (int m = 1; m < n; ++m) {
        const double t0 = (m - 1) * h, t1 = m * h;
        const double gm = g(0.5 * (t0 + t1)), g1 = g(t1);
        I += h / 6.0 * (gp + 4 * gm + g1);
        gp = g1;
        const double p = a - t1 * t1;
        best = std::max(best, std::log(p / (1 - p)) + I * I);
    }
    return best;
}
}  // namespace

TEST_CASE("single Gaussian release") {
    for (int d : {1, 2}) {
        ReleaseSampling s;
        s.k = 1;
        s.total_mass = 3.0;
        s.sigma0 = 2.0;
        s.dimension = d;
        s.box_half_width = 5.0;
        const auto prof = sample_release_profile(s, 42);
        REQUIRE(prof.count() == 1);
        const auto c = prof.centers[0];
        CHECK(prof.density(c[0], c[1]) == doctest::Approx(3.0 / std::pow(2 * pi * 2.0, 0.5 * d)).epsilon(1e-14));
        CHECK(prof.density(c[0] + 0.3, c[1]) < prof.density(c[0], c[1]));
    }
    ReleaseProfile p;
    p.per_site_mass = 0.7;
    p.centers = {{0.0, 0.0}};
    p.variances = {1.5};
    p.background = 0.01;
    CHECK(initial_frequency(p, 0.0) == doctest::Approx(0.7 / (0.7 + std::sqrt(2 * pi * 1.5) * 0.01)).epsilon(1e-14));
    p.per_site_mass = 0.01 * std::sqrt(2 * pi * 1.5);
    CHECK(initial_frequency(p, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    p.per_site_mass = 0.0;
    CHECK(initial_frequency(p, 0.0) == 0.0);
}

TEST_CASE("sampled profiles conserve mass and are reproducible") {
    ReleaseSampling s;
    s.k = 7;
    s.total_mass = 2.5;
    s.box_half_width = 4.0;
    s.sigma0 = 1.0;
    s.epsilon = 0.5;
    const auto a = sample_release_profile(s, 42);
    const auto b = sample_release_profile(s, 42);
    CHECK(a.centers == b.centers);
    CHECK(a.variances == b.variances);
    CHECK(sample_release_profile(s, 43).centers != a.centers);
    CHECK(a.total_mass() == doctest::Approx(2.5).epsilon(1e-14));
    for (std::size_t i = 0; i < a.count(); ++i) {
        CHECK(std::abs(a.centers[i][0]) <= 4.0);
        CHECK(a.variances[i] >= 0.5);
        CHECK(a.variances[i] <= 1.5);
    }
    const double integral = oracle::simpson([&](double x) { return a.density(x); }, -30.0, 30.0, 20000);
    CHECK(integral == doctest::Approx(2.5).epsilon(1e-9));

    s.dimension = 2;
    s.epsilon = 0.0;
    const auto q = sample_release_profile(s, 9);
    double sum = 0.0;
    const double h = 0.1;
    for (double x = -25.0; x <= 25.0; x += h) {
        for (double y = -25.0; y <= 25.0; y += h) sum += q.density(x, y);
    }
    CHECK(sum * h * h == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("invalid sampling requests") {
    ReleaseSampling s;
    s.box_half_width = 0.0;
    try {
        (void)sample_release_profile(s, 1);
        FAIL("expected InvalidBox");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidBox);
    }
    s.box_half_width = 1.0;
    s.k = 0;
    CHECK_THROWS_AS((void)sample_release_profile(s, 1), Error);
    s.k = 1;
    s.epsilon = 2.0;
    CHECK_THROWS_AS((void)sample_release_profile(s, 1), Error);
}

TEST_CASE("non-extinction condition") {
    const auto& c = field_curve();
    const double sigma = 1.0;
    const auto grid = default_nec_alpha_grid(c);
    CHECK(grid.size() == 64);
    CHECK(grid.front() > c.theta_c());
    CHECK(grid.back() < c.theta_plus());
    std::vector<double> shifts;
    for (double s = -5.0; s <= 5.0; s += 0.25) shifts.push_back(s);

    const auto prof = bubble_profile(c, 0.7, sigma, 512);
    auto bumped = [&](double x) { return std::min(c.theta_plus(), prof(x - 1.0) + 1e-3 * std::exp(-x * x / 400.0)); };
    const auto w = check_nec(bumped, c, sigma, {0.7}, shifts);
    CHECK(w.holds);
    CHECK(w.alpha == 0.7);
    CHECK(check_nec([](double) { return 0.0; }, c, sigma, grid, shifts).holds == false);

    // A single release below the central-density bound never dominates a bubble.
    ReleaseProfile one;
    one.per_site_mass = 0.95 * std::sqrt(2 * pi * sigma) * 0.01 * c.theta_c() / (1.0 - c.theta_c());
    one.centers = {{0.0, 0.0}};
    one.variances = {sigma};
    CHECK_FALSE(check_nec(one, c, sigma, grid, default_nec_shift_grid(one, 0.1)).holds);
    auto plateau = [](double x) { return std::abs(x) < 20.0 ? 0.95 : 0.0; };
    CHECK(check_nec(plateau, c, sigma, grid, shifts).holds);
    // Many adjacent strong releases.
    ReleaseProfile many;
    many.per_site_mass = 1.0;
    for (int i = -15; i <= 15; ++i) {
        many.centers.push_back({static_cast<double>(i), 0.0});
        many.variances.push_back(sigma);
    }
    CHECK(check_nec(many, c, sigma, grid, default_nec_shift_grid(many, 0.5)).holds);
}

TEST_CASE("J_alpha derivative limit at alpha") {
    const auto& c = field_curve();
    for (double a : {0.5, 0.7, 0.9}) {
        const double lim = 1.0 / (a * (1.0 - a)) - 1.0 / c.f(a);
        CHECK(j_alpha_derivative(c, a, a - 1e-7) == doctest::Approx(lim).epsilon(1e-4));
        const double h = 1e-6;
        const double one_sided = (j_alpha(c, a, a) - j_alpha(c, a, a - h)) / h;
        CHECK(one_sided == doctest::Approx(lim).epsilon(1e-4));
        const double p = 0.3 * a, hh = 1e-6;
        CHECK(j_alpha_derivative(c, a, p) ==
              doctest::Approx((j_alpha(c, a, p + hh) - j_alpha(c, a, p - hh)) / (2 * hh)).epsilon(1e-5));
    }
}

TEST_CASE("single-release constant against an independent oracle") {
    const auto& c = field_curve();
    for (double a : {0.5, 0.7, 0.9}) {
        CHECK(j_alpha_max(c, a).value == doctest::Approx(j_alpha_oracle(c, a)).epsilon(1e-5));
    }
    // Outer minimum: dense scan then parabolic refinement on the oracle.
    double best = 1e300, best_a = 0.0;
    for (int i = 1; i < 60; ++i) {
        const double a = c.theta_c() + (1.0 - c.theta_c()) * i / 60.0;
        const double v = j_alpha_oracle(c, a);
        if (v < best) {
            best = v;
            best_a = a;
        }
    }
    double lo = best_a - 0.02, hi = best_a + 0.02;
    for (int it = 0; it < 30; ++it) {
        const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        (j_alpha_oracle(c, m1) < j_alpha_oracle(c, m2) ? hi : lo) = (j_alpha_oracle(c, m1) < j_alpha_oracle(c, m2) ? m2 : m1);
    }
    const double oracle_j = j_alpha_oracle(c, 0.5 * (lo + hi));
    const auto sol = single_release_threshold(c, 0.01);
    CHECK(sol.j_star == doctest::Approx(oracle_j).epsilon(1e-5));
    CHECK(sol.alpha_star == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-3));
    CHECK(sol.p_star > 0.0);
    CHECK(sol.p_star < sol.alpha_star);
    const double N = sol.minimal_release(830.0);
    CHECK(N == doctest::Approx(0.01 * std::sqrt(2 * pi * 830.0) * std::exp(sol.j_star)).epsilon(1e-12));
    CHECK(sol.max_diffusivity(N) == doctest::Approx(830.0).epsilon(1e-10));
}

TEST_CASE("equally spaced releases") {
    const auto& c = field_curve();
    const auto a = equally_spaced_requirement(c, 10, 1.0, 0.01);
    const auto b = equally_spaced_requirement(c, 10, 2.0, 0.01);
    CHECK(std::abs(a.alpha_opt - b.alpha_opt) < 1e-6);
    CHECK(a.j_star_k == doctest::Approx(b.j_star_k).epsilon(1e-9));
    CHECK(b.n_tilde_star == doctest::Approx(a.n_tilde_star * std::sqrt(2.0)).epsilon(1e-9));
    const double L = bubble_radius_1d(c, a.alpha_opt, 1.0);
    CHECK(a.j_star_k == doctest::Approx(a.alpha_opt / (1 - a.alpha_opt) * std::exp(L * L / (2.0 * 81.0))).epsilon(1e-12));
    const auto far = equally_spaced_requirement(c, 10000, 1.0, 0.01);
    CHECK(far.j_star_k == doctest::Approx(c.theta_c() / (1.0 - c.theta_c())).epsilon(1e-4));
    CHECK(equally_spaced_requirement(c, 20, 1.0, 0.01).j_star_k < a.j_star_k);
}
