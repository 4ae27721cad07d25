#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "wolbachia/errors.hpp"
#include "wolbachia/reaction.hpp"

using namespace wolbachia;

TEST_CASE("roots of the field-parameter curve") {
    const auto curve = build_reaction(ReactionParams{});
    CHECK(std::abs(curve.theta_c() - 0.36) <= 0.01);

    // Positive root of -0.8 p^2 + 0.99 p - 0.19.
    const double a = -0.8, b = 0.99, c = -0.19;
    const double disc = std::sqrt(b * b - 4 * a * c);
    const double theta = std::min((-b + disc) / (2 * a), (-b - disc) / (2 * a));
    CHECK(curve.theta() == doctest::Approx(theta).epsilon(1e-10));
    CHECK(curve.theta() == doctest::Approx(0.2375).epsilon(1e-10));
    CHECK(curve.theta_plus() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(curve.f(0.0) == 0.0);
    CHECK(std::abs(curve.f(1.0)) < 1e-14);
    CHECK(std::abs(curve.f(curve.theta())) < 1e-10);
    CHECK(curve.theta() < curve.theta_c());
    CHECK(curve.theta_c() < curve.theta_plus());
}

TEST_CASE("f agrees with direct substitution") {
    const auto curve = build_reaction(ReactionParams{});
    CHECK(curve.f(0.5) > 0.0);
    for (double p : {0.01, 0.1, 0.2375, 0.3, 0.5, 0.77, 0.99}) {
        CHECK(curve.f(p) == doctest::Approx(oracle::field_f(p)).epsilon(1e-13));
    }
    ReactionParams q{0.3, 0.05, 0.9, 1.2, 0.02, 500.0};
    const auto other = build_reaction(q);
    for (double p : {0.1, 0.4, 0.8}) {
        CHECK(other.f(p) == doctest::Approx(oracle::field_f(p, 0.3, 0.05, 0.9, 1.2, 0.02)).epsilon(1e-13));
    }
}

TEST_CASE("derivatives match finite differences") {
    const auto curve = build_reaction(ReactionParams{});
    const double h = 1e-5;
    for (double p : {0.05, 0.2, 0.45, 0.7, 0.95}) {
        const double df = (oracle::field_f(p + h) - oracle::field_f(p - h)) / (2 * h);
        CHECK(curve.df(p) == doctest::Approx(df).epsilon(1e-7));
        const double d2f = (curve.df(p + h) - curve.df(p - h)) / (2 * h);
        CHECK(curve.d2f(p) == doctest::Approx(d2f).epsilon(1e-6));
    }
    CHECK(curve.df(0.0) == doctest::Approx(-0.057).epsilon(1e-9));
}

TEST_CASE("antiderivative") {
    const auto curve = build_reaction(ReactionParams{});
    CHECK(curve.F(0.0) == 0.0);
    CHECK(std::abs(curve.F(curve.theta_c())) < 1e-9);
    CHECK(curve.F(1.0) > 0.0);
    for (double p : {0.1, 0.3, 0.6, 0.9, 1.0}) {
        const double ref = oracle::simpson([](double v) { return oracle::field_f(v); }, 0.0, p, 4000);
        CHECK(curve.F(p) == doctest::Approx(ref).epsilon(1e-10));
    }
    CHECK(curve.F_diff(0.7, 0.7 + 1e-9) == doctest::Approx(curve.f(0.7) * 1e-9).epsilon(1e-6));
    // theta_c by a dense sign-change scan of the Simpson antiderivative.
    const double scan = oracle::first_sign_change(
        [](double x) { return oracle::simpson([](double v) { return oracle::field_f(v); }, 0.0, x, 400); },
        curve.theta(), 1.0, 2000);
    CHECK(curve.theta_c() == doctest::Approx(scan).epsilon(1e-8));
    CHECK(find_theta_c(curve) == doctest::Approx(curve.theta_c()).epsilon(1e-12));
}

TEST_CASE("cubic test curve") {
    const auto curve = oracle::cubic(0.25);
    CHECK(curve.theta() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(curve.theta_plus() == doctest::Approx(1.0).epsilon(1e-12));
    const double scan = oracle::first_sign_change(
        [](double x) { return -std::pow(x, 4) / 4 + 1.25 * std::pow(x, 3) / 3 - 0.125 * x * x; }, 0.25, 1.0, 10000);
    CHECK(curve.theta_c() == doctest::Approx(scan).epsilon(1e-9));
    CHECK(curve.theta_c() == doctest::Approx((5.0 - std::sqrt(7.0)) / 6.0).epsilon(1e-9));
}

TEST_CASE("balanced cubic is rejected") {
    // F(1) = 0 for p (p - 1/2) (1 - p): no level above theta_plus where F turns positive.
    try {
        (void)oracle::cubic(0.5);
        FAIL("expected NotBistable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotBistable);
    }
}

TEST_CASE("monostable curve is rejected") {
    try {
        (void)ReactionCurve::from_functions({[](double p) { return p * (1 - p); }, [](double p) { return 1 - 2 * p; },
                                             [](double) { return -2.0; }});
        FAIL("expected NotBistable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotBistable);
    }
}

TEST_CASE("parameter validation") {
    for (auto mutate : std::vector<std::function<void(ReactionParams&)>>{
             [](ReactionParams& p) { p.d_s = -1; }, [](ReactionParams& p) { p.s_h = 1.5; },
             [](ReactionParams& p) { p.delta = 0; }, [](ReactionParams& p) { p.sigma = -3; },
             [](ReactionParams& p) { p.mu = 2; }}) {
        ReactionParams p;
        mutate(p);
        CHECK_THROWS_AS(p.validate(), Error);
    }
}

TEST_CASE("domain") {
    const auto curve = build_reaction(ReactionParams{});
    try {
        (void)curve.f(1.5);
        FAIL("expected DomainError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DomainError);
    }
}
