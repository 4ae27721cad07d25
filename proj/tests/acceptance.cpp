// One PASS/FAIL line per acceptance criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wolbachia/bubble.hpp"
#include "wolbachia/pde.hpp"
#include "wolbachia/probability.hpp"
#include "wolbachia/release.hpp"

using namespace wolbachia;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

template <class... Args>
std::string format(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const ReactionCurve& field_curve() {
    static const ReactionCurve c = build_reaction(ReactionParams{});
    return c;
}

double r_star() {
    static const double r = min_bubble_radius(field_curve(), 2.0).radius;
    return r;
}

std::vector<double> sweep() {
    const double R = r_star();
    std::vector<double> L(23);
    for (int i = 0; i < 23; ++i) L[i] = 0.5 * R + R * i / 22.0;
    return L;
}

struct Curve {
    std::vector<ProbabilityEstimate> points;
    std::size_t argmax() const {
        std::size_t b = 0;
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (points[i].value > points[b].value) b = i;
        }
        return b;
    }
};

Curve mc_curve(std::size_t k, double lambda, std::uint64_t samples, const std::vector<double>& Ls) {
    Curve c;
    for (double L : Ls) c.points.push_back(mc_success_probability({k, L, lambda, r_star()}, samples, 2024));
    return c;
}

Verdict c1() {
    const auto curve = build_reaction(ReactionParams{0.27, 0.1, 0.8, 10.0 / 9.0, 0.0, 830.0});
    return {std::abs(curve.theta_c() - 0.36) <= 0.01, fmt("theta_c = %.6f (target 0.36 +- 0.01)", curve.theta_c())};
}

Verdict c2() {
    const auto m = min_bubble_radius(field_curve(), 2.0);
    const double lam = ProtocolSpec::default_lambda();
    const auto k0 = minimal_release_count(lam, m.radius);
    const bool ok = std::abs(m.radius - 10.981) <= 0.02 && std::abs(lam - 1.66511) < 5e-6 &&
                    lam == 2.0 * std::sqrt(std::log(2.0)) && k0 == 8;
    return {ok, format("R* = %.6f, lambda = %.6f, k0 = %zu", m.radius, lam, k0)};
}

Verdict c3() {
    const double unit = std::sqrt(2.0 * 830.0);
    const double gap = ProtocolSpec::default_lambda() * unit;
    const double box = 6.3 * unit;
    const auto opt = optimal_box_k0(ProtocolSpec::default_lambda(), r_star());
    const double ours = opt.L_hat * unit;
    const bool ok = std::abs(gap - 68.0) <= 1.0 && std::abs(box - 257.0) <= 5.0 && std::abs(ours - 257.0) <= 5.0;
    return {ok, format("gap %.2f m, 6.3 sqrt(2 sigma) = %.2f m, L_hat sqrt(2 sigma) = %.2f m (L_hat = %.4f)", gap, box,
                       ours, opt.L_hat)};
}

Verdict c4() {
    const auto s = single_release_threshold(field_curve(), 0.01);
    return {std::abs(s.j_star - 38.0) <= 1.0,
            format("j* = %.6f at alpha* = %.6f, p* = %.6f (target 38 +- 1)", s.j_star, s.alpha_star, s.p_star)};
}

Verdict c5() {
    const double lam = ProtocolSpec::default_lambda();
    const auto Ls = sweep();
    const auto c20 = mc_curve(20, lam, 1000000, Ls);
    const auto c40 = mc_curve(40, lam, 1000000, Ls);
    const auto c80 = mc_curve(80, lam, 1000000, Ls);
    auto below = [](const Curve& a, const Curve& b) {
        const auto& x = a.points[a.argmax()];
        const auto& y = b.points[b.argmax()];
        return x.value <= y.value + 2.0 * std::hypot(x.std_error, y.std_error);
    };
    const bool ordered = below(c20, c40) && below(c40, c80);
    const double Lmax = Ls[c80.argmax()];
    const bool arg_ok = std::abs(Lmax - 6.3) <= 0.5;

    // k = 10 at 1e7 samples around the maximum of the curve.
    double best10 = 0.0, best10_L = 0.0;
    for (std::size_t i = 1; i <= 4; ++i) {
        const auto e = mc_success_probability({10, Ls[i], lam, r_star()}, 10000000, 2024);
        if (e.value > best10) {
            best10 = e.value;
            best10_L = Ls[i];
        }
    }
    const bool k10_ok = best10 >= 1e-6 && best10 <= 1e-4;
    return {ordered && arg_ok && k10_ok,
            format("max k=20 %.5f, k=40 %.5f, k=80 %.5f (ordered: %s); k=80 argmax L = %.4f; k=10 max %.3g at L = %.3f",
                   c20.points[c20.argmax()].value, c40.points[c40.argmax()].value, c80.points[c80.argmax()].value,
                   ordered ? "yes" : "no", Lmax, best10, best10_L)};
}

Verdict c6() {
    const double lam = 1.0 / std::sqrt(2.0);
    const auto k0 = minimal_release_count(lam, r_star());
    const auto c = mc_curve(80, lam, 1000000, sweep());
    const double m = c.points[c.argmax()].value;
    return {k0 == 17 && std::abs(m - 0.5) <= 0.1, format("k0 = %zu, k=80 maximum %.5f", k0, m)};
}

Verdict c7() {
    const double lam = ProtocolSpec::default_lambda();
    const double R = r_star();
    const std::uint64_t n = 1000000;
    double worst = 0.0;
    for (std::size_t k : {8, 10, 12}) {
        for (int j = 0; j < 10; ++j) {
            const double L = 0.5 * R + 0.1 + R * j / 9.0;
            const double exact = exact_success_probability({k, L, lam, R}).value;
            const auto mc = mc_success_probability({k, L, lam, R}, n, 77 + j);
            const double se = std::sqrt(std::max(exact * (1.0 - exact), 0.0) / static_cast<double>(n));
            const double z = se > 0.0 ? std::abs(mc.value - exact) / se : (mc.value == exact ? 0.0 : 1e9);
            worst = std::max(worst, z);
        }
    }
    BetaRecursion beta(lam, R, 3.0 * R);
    double rel = 0.0;
    for (double s : {R + 0.2, R + 0.6, 12.5, 14.0, 20.0, 30.0}) {
        const double cf = beta_k0_closed_form(lam, R, s);
        rel = std::max(rel, std::abs(beta(8, s) - cf) / cf);
    }
    const auto box = optimal_box_k0(lam, R);
    const bool bound = 2.0 * box.L_hat >= 8.0 / 7.0 * R;
    return {worst <= 3.0 && rel <= 1e-4 && bound,
            format("worst |MC - exact| = %.2f SE; beta_k0 rel err %.2e; 2 L_hat = %.4f >= %.4f", worst, rel,
                   2.0 * box.L_hat, 8.0 / 7.0 * R)};
}

double gl8(const std::function<double(double)>& f, double a, double b) {
    static const double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
    static const double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    const double m = 0.5 * (a + b), r = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += w[i] * (f(m - r * x[i]) + f(m + r * x[i]));
    return s * r;
}

Verdict c8() {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0, worst3 = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const std::size_t i = 2 + static_cast<std::size_t>(U(gen) * 5.0);  // 2..6
        const double lam = 0.2 + 2.0 * U(gen);
        const double u = -3.0 + 6.0 * U(gen);
        const double v = u - 0.2 * lam + (static_cast<double>(i) - 0.6) * lam * U(gen);
        double rec;
        if (i == 2) {
            rec = (v - u >= 0.0 && v - u <= lam) ? 1.0 : 0.0;
        } else {
            std::vector<double> cuts{v - lam};
            for (std::size_t m = 0; m < i; ++m) {
                const double c = u + static_cast<double>(m) * lam;
                if (c > v - lam && c < v) cuts.push_back(c);
            }
            cuts.push_back(v);
            rec = 0.0;
            for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
                rec += gl8([&](double w) { return gamma_measure(i - 1, lam, u, w); }, cuts[j], cuts[j + 1]);
            }
        }
        worst = std::max(worst, std::abs(gamma_measure(i, lam, u, v) - rec));

        const double b = u + lam * 2.5 * U(gen) - 0.3 * lam;
        const double inter = std::max(0.0, std::min(u + lam, b) - std::max(u, b - lam));
        worst3 = std::max(worst3, std::abs(gamma_measure(3, lam, u, b) - inter));
    }
    return {worst <= 1e-6 && worst3 <= 1e-12,
            format("recursion max error %.2e, interval oracle max error %.2e (1000 cases each)", worst, worst3)};
}

struct Run1d {
    Trajectory traj;
    bool in_range = true;
    bool monotone = true;
    double seconds = 0.0;
};

Run1d run_1d(const InitialField& p0, double horizon) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& c = field_curve();
    UniformGrid g{1, 50.0, 1025};
    auto s = init_state(g, p0, c, 1.0);
    Stepper st(c, g, 1.0);
    Run1d r;
    double E = scheme_energy(s.p, g, c, 1.0);
    std::vector<Snapshot> none;
    while (s.t < horizon) {
        st.step(s);
        const double En = scheme_energy(s.p, g, c, 1.0);
        if (En > E + 1e-6 * (1.0 + std::abs(E))) r.monotone = false;
        E = En;
        for (double v : s.p) {
            if (v < 0.0 || v > c.theta_plus()) r.in_range = false;
        }
        if (classify(s, c, 1e-3) != Classification::Undecided) break;
    }
    r.traj.outcome.classification = classify(s, c, 1e-3);
    r.traj.outcome.decided_at = s.t;
    r.traj.outcome.energy.push_back({s.t, E});
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

Verdict c9() {
    const auto& c = field_curve();
    const auto prof = bubble_profile(c, 0.6, 1.0, 4096);
    const auto inv = run_1d([&](double x, double) { return prof(x); }, 600.0);
    const auto ext = run_1d([&](double, double) { return 0.9 * c.theta(); }, 600.0);
    bool ok = inv.in_range && ext.in_range && inv.monotone && ext.monotone &&
              inv.traj.outcome.classification == Classification::Invasion &&
              ext.traj.outcome.classification == Classification::Extinction && inv.seconds < 30.0 && ext.seconds < 30.0;
    // Negative energy at the end of a run must come with invasion.
    int negative = 0, consistent = 0;
    for (double w : {4.0, 8.0, 12.0}) {
        for (double h : {0.6, 0.9}) {
            const auto r = run_1d([&](double x, double) { return std::abs(x) < w ? h : 0.0; }, 600.0);
            ok = ok && r.in_range && r.monotone;
            if (r.traj.outcome.energy.back().energy < 0.0) {
                ++negative;
                consistent += r.traj.outcome.classification == Classification::Invasion;
            }
        }
    }
    ok = ok && negative == consistent && negative > 0;
    return {ok, format("bubble: %s at t=%.1f (%.1f s); 0.9 theta: %s at t=%.1f (%.1f s); negative-energy runs %d/%d invade",
                       std::string(to_string(inv.traj.outcome.classification)).c_str(), inv.traj.outcome.decided_at,
                       inv.seconds, std::string(to_string(ext.traj.outcome.classification)).c_str(),
                       ext.traj.outcome.decided_at, ext.seconds, consistent, negative)};
}

Verdict c10() {
    const auto& c = field_curve();
    const double sigma = 4.0, sigma0 = 3.0, N0 = 0.01, q = 0.75;
    UniformGrid g{2, 50.0, 256};
    std::vector<std::string> got;
    const std::vector<Classification> want{Classification::Extinction, Classification::Invasion,
                                           Classification::Extinction};
    bool ok = true;
    const double halves[3] = {100.0 / 3.0, 25.0, 4.0};
    for (int i = 0; i < 3; ++i) {
        ReleaseSampling rs;
        rs.k = 50;
        rs.dimension = 2;
        rs.box_half_width = halves[i];
        rs.sigma0 = sigma0;
        rs.background = N0;
        rs.total_mass = 50.0 * q / (1.0 - q) * N0 * 2.0 * std::numbers::pi * sigma0;
        auto s = init_state(g, sample_release_profile(rs, 7), c, sigma);
        SimOptions o;
        o.horizon = 400.0;
        o.stop_when_decided = true;
        o.energy_every = 100;
        const auto t = simulate(s, c, o);
        ok = ok && t.outcome.classification == want[i];
        got.push_back(std::string(to_string(t.outcome.classification)) + fmt("@%.1f", t.outcome.decided_at));
    }
    return {ok, "2L/3: " + got[0] + ", L/2: " + got[1] + ", L/12.5: " + got[2]};
}

Verdict c11() {
    CoverSpec s;
    s.dimension = 1;
    s.alpha = 0.7;
    s.sigma = 1.0;
    s.background = 0.01;
    s.radius = energy_radius(field_curve(), s.alpha, s.sigma, 1).radius;
    s.per_release_mass = 8.0 * s.critical_mass();
    s.half_width = 1.25 * s.radius;
    std::string vals;
    bool mono = true;
    ProbabilityEstimate prev{};
    prev.value = -1.0;
    for (std::size_t k : {4, 8, 16, 32, 64}) {
        s.k = k;
        const auto e = mc_cover_probability(s, 20000, 5);
        if (e.value + 2.0 * std::hypot(e.std_error, prev.std_error) < prev.value) mono = false;
        prev = e;
        vals += fmt(" %.4f", e.value);
    }
    return {mono && prev.value >= 0.99, "estimates over k = 4..64:" + vals};
}

Verdict c12() {
    const auto rep = check_uniqueness(field_curve());
    const auto m = min_bubble_radius(field_curve(), 1.0);
    bool strictly = true;
    for (std::size_t i = 1; i < rep.h_samples.size(); ++i) {
        strictly = strictly && rep.h_samples[i].frequency > rep.h_samples[i - 1].frequency;
    }
    const bool ok = rep.all_hold() && strictly && std::abs(rep.h_at_alpha0 + 2.0) < 1e-4 &&
                    std::abs(rep.alpha_0 - m.alpha_0) < 1e-5;
    return {ok, format("B0-B3 %s, h increasing %s on %zu points, h(alpha_0) + 2 = %.2e, alpha_0 = %.8f vs %.8f",
                       rep.all_hold() ? "hold" : "fail", strictly ? "yes" : "no", rep.h_samples.size(),
                       rep.h_at_alpha0 + 2.0, rep.alpha_0, m.alpha_0)};
}

}  // namespace

int main() {
    struct Item {
        int id;
        const char* name;
        double budget;
        Verdict (*fn)();
    };
    const Item items[] = {
        {1, "theta_c", 1, c1},          {2, "minimal radius", 10, c2},   {3, "physical units", 60, c3},
        {4, "single release", 60, c4},  {5, "MC curves", 600, c5},       {6, "degraded constant", 180, c6},
        {7, "exact vs MC", 300, c7},    {8, "gamma suite", 60, c8},      {9, "PDE suite", 300, c9},
        {10, "2D figure", 600, c10},    {11, "coupon collector", 120, c11}, {12, "uniqueness", 60, c12},
    };
    int failed = 0;
    for (const auto& it : items) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = it.fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (sec > it.budget) {
            v.pass = false;
            v.detail += fmt(" [over time budget %.0f s]", it.budget);
        }
        failed += !v.pass;
        std::printf("%s %2d %-18s %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", it.id, it.name, v.detail.c_str(), sec);
        std::fflush(stdout);
    }
    std::printf("%d of 12 criteria passed\n", 12 - failed);
    return failed == 0 ? 0 : 1;
}
