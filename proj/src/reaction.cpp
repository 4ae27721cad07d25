#include "wolbachia/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wolbachia/errors.hpp"
#include "wolbachia/numerics/optimize.hpp"

namespace wolbachia {

namespace {

constexpr double kDomainSlack = 1e-12;
constexpr std::size_t kScanPoints = 4096;

bool finite_all(std::initializer_list<double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

// Rational form f(p) = K * P(p) / D(p), P cubic, D quadratic.
struct RationalReaction {
    double K, a3, a2, a1, d2, d1, d0;

    double den(double p) const { return (d2 * p + d1) * p + d0; }

    double check_den(double p) const {
        const double d = den(p);
        if (!(d > 0.0)) {
            throw Error(ErrorCode::SingularDenominator, "denominator vanishes at p = " + std::to_string(p));
        }
        return d;
    }

    double f(double p) const {
        const double D = check_den(p);
        const double P = ((a3 * p + a2) * p + a1) * p;
        return K * P / D;
    }
    double df(double p) const {
        const double D = check_den(p);
        const double P = ((a3 * p + a2) * p + a1) * p;
        const double dP = (3.0 * a3 * p + 2.0 * a2) * p + a1;
        const double dD = 2.0 * d2 * p + d1;
        return K * (dP * D - P * dD) / (D * D);
    }
    double d2f(double p) const {
        const double D = check_den(p);
        const double P = ((a3 * p + a2) * p + a1) * p;
        const double dP = (3.0 * a3 * p + 2.0 * a2) * p + a1;
        const double d2P = 6.0 * a3 * p + 2.0 * a2;
        const double dD = 2.0 * d2 * p + d1;
        const double d2D = 2.0 * d2;
        const double num = (d2P * D - P * d2D) * D - 2.0 * dD * (dP * D - P * dD);
        return K * num / (D * D * D);
    }
};

}  // namespace

void ReactionParams::validate() const {
    if (!finite_all({d_s, s_f, s_h, delta, mu, sigma})) {
        throw Error(ErrorCode::InvalidArgument, "reaction parameters must be finite");
    }
    if (!(d_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "d_s must be > 0");
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be > 0");
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be > 0");
    if (!(s_f >= 0.0 && s_f < 1.0)) throw Error(ErrorCode::InvalidArgument, "s_f must lie in [0, 1)");
    if (!(s_h > 0.0 && s_h <= 1.0)) throw Error(ErrorCode::InvalidArgument, "s_h must lie in (0, 1]");
    if (!(mu >= 0.0 && mu < 1.0)) throw Error(ErrorCode::InvalidArgument, "mu must lie in [0, 1)");
}

ReactionCurve ReactionCurve::from_functions(Derivatives fns, double upper, std::size_t table_cells) {
    if (!fns.f || !fns.df || !fns.d2f) throw Error(ErrorCode::InvalidArgument, "missing derivative callable");
    if (!(upper > 0.0)) throw Error(ErrorCode::InvalidArgument, "upper bound must be positive");
    if (table_cells < 16) throw Error(ErrorCode::InvalidArgument, "F table needs at least 16 cells");

    const auto& f = fns.f;
    if (std::abs(f(0.0)) > 1e-14) throw Error(ErrorCode::NotBistable, "f(0) != 0");

    // Scan for sign changes: - on (0, theta), + on (theta, theta_plus).
    const double h = upper / static_cast<double>(kScanPoints);
    double theta = -1.0;
    double theta_plus = -1.0;
    double prev = f(h);
    if (!(prev < 0.0)) throw Error(ErrorCode::NotBistable, "f must be negative just above 0");
    for (std::size_t i = 2; i <= kScanPoints; ++i) {
        const double x = h * static_cast<double>(i);
        const double cur = f(x);
        if (theta < 0.0 && prev < 0.0 && cur >= 0.0) {
            theta = numerics::bisect(f, x - h, x);
        } else if (theta >= 0.0 && theta_plus < 0.0 && prev > 0.0 && cur <= 0.0) {
            if (i == kScanPoints && std::abs(cur) <= 1e-12) {
                theta_plus = upper;
            } else {
                theta_plus = cur == 0.0 ? x : numerics::bisect(f, x - h, x);
            }
        } else if (theta_plus >= 0.0 && cur > 1e-12) {
            throw Error(ErrorCode::NotBistable, "f changes sign again above theta_plus");
        }
        prev = cur;
    }
    if (theta < 0.0) throw Error(ErrorCode::RootBracketingFailed, "no unstable root theta found");
    if (theta_plus < 0.0 && std::abs(f(upper)) <= 1e-12) theta_plus = upper;
    if (theta_plus < 0.0) throw Error(ErrorCode::NotBistable, "no stable upper root found in (theta, upper]");

    auto state = std::make_shared<State>();
    state->theta = theta;
    state->theta_plus = theta_plus;
    state->rule = &numerics::gauss_legendre(8);
    state->cell = theta_plus / static_cast<double>(table_cells);
    state->table.assign(table_cells + 1, 0.0);
    double max_df = 0.0;
    for (std::size_t k = 1; k <= table_cells; ++k) {
        const double lo = state->cell * static_cast<double>(k - 1);
        const double hi = k == table_cells ? theta_plus : state->cell * static_cast<double>(k);
        const auto q = numerics::integrate(f, lo, hi, {.rel_tol = 1e-12, .abs_tol = 1e-300});
        state->table[k] = state->table[k - 1] + q.value;
    }
    for (std::size_t k = 0; k <= table_cells; ++k) {
        max_df = std::max(max_df, std::abs(fns.df(std::min(theta_plus, state->cell * static_cast<double>(k)))));
    }
    state->max_abs_df = max_df;
    state->fns = std::move(fns);

    ReactionCurve curve(state);
    if (!(curve.F(theta_plus) > 1e-9 * std::abs(curve.F(theta)))) throw Error(ErrorCode::NotBistable, "F(theta_plus) must be positive");
    // Sign pattern on a dense grid, away from the roots.
    for (std::size_t i = 1; i < kScanPoints; ++i) {
        const double x = theta_plus * static_cast<double>(i) / static_cast<double>(kScanPoints);
        const double fx = curve.f(x);
        if (x < theta - 1e-9 && fx >= 0.0) throw Error(ErrorCode::NotBistable, "f >= 0 inside (0, theta)");
        if (x > theta + 1e-9 && x < theta_plus - 1e-9 && fx <= 0.0) {
            throw Error(ErrorCode::NotBistable, "f <= 0 inside (theta, theta_plus)");
        }
    }
    state->theta_c = find_theta_c(curve);
    return curve;
}

ReactionCurve build_reaction(const ReactionParams& params) {
    params.validate();
    const double trans = (1.0 - params.mu) / params.delta;
    RationalReaction r{};
    r.K = params.delta * params.d_s;
    r.a3 = -params.s_h;
    r.a2 = 1.0 + params.s_h - (1.0 - params.s_f) * (trans + params.mu);
    r.a1 = (1.0 - params.s_f) * trans - 1.0;
    r.d2 = params.s_h;
    r.d1 = -(params.s_f + params.s_h);
    r.d0 = 1.0;

    // Denominator must stay positive on [0, 1].
    double dmin = std::min(r.den(0.0), r.den(1.0));
    const double vertex = -r.d1 / (2.0 * r.d2);
    if (vertex > 0.0 && vertex < 1.0) dmin = std::min(dmin, r.den(vertex));
    if (!(dmin > 0.0)) throw Error(ErrorCode::SingularDenominator, "denominator vanishes on [0, 1]");

    ReactionCurve::Derivatives fns{[r](double p) { return r.f(p); }, [r](double p) { return r.df(p); },
                    [r](double p) { return r.d2f(p); }};
    ReactionCurve curve = ReactionCurve::from_functions(std::move(fns), 1.0);
    auto state = std::make_shared<ReactionCurve::State>(*curve.state_);
    state->params = params;
    return ReactionCurve(state);
}

double find_theta_c(const ReactionCurve& curve) {
    return numerics::bisect([&](double x) { return curve.F(x); }, curve.theta(), curve.theta_plus());
}

void ReactionCurve::check_domain(double p) const {
    if (!(p >= -kDomainSlack && p <= state_->theta_plus + kDomainSlack)) {
        throw Error(ErrorCode::DomainError, "frequency " + std::to_string(p) + " outside [0, theta_plus]");
    }
}

double ReactionCurve::f(double p) const {
    check_domain(p);
    return state_->fns.f(p);
}

double ReactionCurve::df(double p) const {
    check_domain(p);
    return state_->fns.df(p);
}

double ReactionCurve::d2f(double p) const {
    check_domain(p);
    return state_->fns.d2f(p);
}

double ReactionCurve::local_integral(double a, double b) const {
    return numerics::fixed_gauss(state_->fns.f, a, b, *state_->rule);
}

double ReactionCurve::F(double p) const {
    check_domain(p);
    p = std::clamp(p, 0.0, state_->theta_plus);
    const std::size_t cells = state_->table.size() - 1;
    const auto k = std::min(static_cast<std::size_t>(p / state_->cell), cells - 1);
    const double node = state_->cell * static_cast<double>(k);
    return state_->table[k] + local_integral(node, p);
}

double ReactionCurve::F_diff(double a, double b) const {
    check_domain(a);
    check_domain(b);
    if (std::abs(b - a) <= state_->cell) return local_integral(a, b);
    return F(b) - F(a);
}

}  // namespace wolbachia
