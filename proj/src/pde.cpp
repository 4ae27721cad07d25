#include "wolbachia/pde.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "wolbachia/errors.hpp"

namespace wolbachia {

namespace {

constexpr double kRoundoff = 1e-12;

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

void check_grid(const UniformGrid& grid) {
    if (grid.dimension != 1 && grid.dimension != 2) throw Error(ErrorCode::InvalidArgument, "dimension must be 1 or 2");
    if (grid.nodes < 16) throw Error(ErrorCode::GridTooCoarse, "simulation grid needs at least 16 nodes per axis");
    if (!(grid.half_width > 0.0)) throw Error(ErrorCode::InvalidBox, "half-width must be positive");
}

}  // namespace

double default_time_step(const ReactionCurve& curve, const UniformGrid& grid, double sigma) {
    const double dx = grid.dx();
    return std::min(0.5 / curve.max_abs_df(), dx * dx / (4.0 * sigma));
}

SimState init_state(const UniformGrid& grid, const InitialField& initial, const ReactionCurve& curve, double sigma,
                    double dt) {
    check_grid(grid);
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    if (dt <= 0.0) dt = default_time_step(curve, grid, sigma);
    if (dt > 1.0 / curve.max_abs_df()) throw Error(ErrorCode::UnstableStep, "dt exceeds 1 / max|f'|");
    SimState s;
    s.grid = grid;
    s.sigma = sigma;
    s.dt = dt;
    s.p.resize(grid.size());
    const std::size_t n = grid.nodes;
    const double top = curve.theta_plus();
    for (std::size_t q = 0; q < s.p.size(); ++q) {
        const double x = grid.coordinate(q % n);
        const double y = grid.dimension == 2 ? grid.coordinate(q / n) : 0.0;
        double v = initial(x, y);
        if (v < 0.0 || v > top || !std::isfinite(v)) {
            ++s.clipped;
            v = std::isfinite(v) ? std::clamp(v, 0.0, top) : 0.0;
        }
        s.p[q] = v;
    }
    return s;
}

SimState init_state(const UniformGrid& grid, const ReleaseProfile& release, const ReactionCurve& curve, double sigma,
                    double dt) {
    if (release.dimension != grid.dimension) throw Error(ErrorCode::InvalidArgument, "release and grid dimensions differ");
    return init_state(
        grid, [&](double x, double y) { return initial_frequency(release, x, y); }, curve, sigma, dt);
}

struct Stepper::Impl {
    const ReactionCurve* curve;
    UniformGrid grid;
    double sigma;
    // 1D
    std::vector<double> c_prime, d_prime;
    // 2D
    std::vector<double> buffer, eigen;
    fftw_plan plan = nullptr;
    double cached_dt = -1.0;
    std::vector<double> divisor;

    ~Impl() {
        if (plan) {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(plan);
        }
    }

    void solve_1d(std::vector<double>& rhs, double dt) {
        const std::size_t n = rhs.size();
        const double h = grid.dx();
        const double r = dt * sigma / (h * h);
        c_prime.resize(n);
        d_prime.resize(n);
        // Row i: lower a_i, diagonal b, upper c_i, mirror rows at both ends.
        const double b = 1.0 + 2.0 * r;
        auto upper = [&](std::size_t i) { return i == 0 ? -2.0 * r : -r; };
        auto lower = [&](std::size_t i) { return i + 1 == n ? -2.0 * r : -r; };
        c_prime[0] = upper(0) / b;
        d_prime[0] = rhs[0] / b;
        for (std::size_t i = 1; i < n; ++i) {
            const double m = b - lower(i) * c_prime[i - 1];
            c_prime[i] = i + 1 < n ? upper(i) / m : 0.0;
            d_prime[i] = (rhs[i] - lower(i) * d_prime[i - 1]) / m;
        }
        rhs[n - 1] = d_prime[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] = d_prime[i] - c_prime[i] * rhs[i + 1];
    }

    void solve_2d(std::vector<double>& rhs, double dt) {
        const std::size_t n = grid.nodes;
        if (dt != cached_dt) {
            divisor.resize(n * n);
            const double scale = 4.0 * static_cast<double>((n - 1) * (n - 1));
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    divisor[j * n + i] = scale * (1.0 + dt * sigma * (eigen[i] + eigen[j]));
                }
            }
            cached_dt = dt;
        }
        std::copy(rhs.begin(), rhs.end(), buffer.begin());
        fftw_execute(plan);
        for (std::size_t q = 0; q < buffer.size(); ++q) buffer[q] /= divisor[q];
        fftw_execute(plan);
        std::copy(buffer.begin(), buffer.end(), rhs.begin());
    }
};

Stepper::Stepper(const ReactionCurve& curve, const UniformGrid& grid, double sigma) : impl_(std::make_unique<Impl>()) {
    check_grid(grid);
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    impl_->curve = &curve;
    impl_->grid = grid;
    impl_->sigma = sigma;
    if (grid.dimension == 2) {
        const std::size_t n = grid.nodes;
        const double h = grid.dx();
        impl_->buffer.assign(n * n, 0.0);
        impl_->eigen.resize(n);
        for (std::size_t m = 0; m < n; ++m) {
            impl_->eigen[m] = (2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(m) / static_cast<double>(n - 1))) / (h * h);
        }
        std::lock_guard lock(fftw_planner_mutex());
        // REDFT00 is its own inverse up to 2(n - 1) per axis.
        impl_->plan = fftw_plan_r2r_2d(static_cast<int>(n), static_cast<int>(n), impl_->buffer.data(),
                                       impl_->buffer.data(), FFTW_REDFT00, FFTW_REDFT00, FFTW_ESTIMATE);
    }
}

Stepper::~Stepper() = default;

void Stepper::step(SimState& state, double dt) {
    if (dt <= 0.0) dt = state.dt;
    const ReactionCurve& curve = *impl_->curve;
    if (!(dt > 0.0) || dt > 1.0 / curve.max_abs_df()) throw Error(ErrorCode::UnstableStep, "dt outside (0, 1 / max|f'|]");
    if (state.p.size() != impl_->grid.size()) throw Error(ErrorCode::InvalidArgument, "state does not match stepper grid");
    auto& p = state.p;
    for (auto& v : p) v += dt * curve.f(v);
    if (impl_->grid.dimension == 1) {
        impl_->solve_1d(p, dt);
    } else {
        impl_->solve_2d(p, dt);
    }
    const double top = curve.theta_plus();
    for (auto& v : p) {
        if (v < -kRoundoff || v > top + kRoundoff || !std::isfinite(v)) {
            throw Error(ErrorCode::UnstableStep, "field left [0, theta_plus]");
        }
        v = std::clamp(v, 0.0, top);
    }
    state.t += dt;
}

std::string_view to_string(Classification c) {
    switch (c) {
        case Classification::Invasion: return "invasion";
        case Classification::Extinction: return "extinction";
        case Classification::Undecided: return "undecided";
    }
    return "undecided";
}

Classification classify(const SimState& state, const ReactionCurve& curve, double delta_tol) {
    const auto& g = state.grid;
    const std::size_t n = g.nodes;
    const double window = 0.25 * g.half_width;
    const double top = curve.theta_plus();
    double window_min = top;
    double sup = 0.0;
    for (std::size_t q = 0; q < state.p.size(); ++q) {
        const double v = state.p[q];
        sup = std::max(sup, v);
        const double x = g.coordinate(q % n);
        const double y = g.dimension == 2 ? g.coordinate(q / n) : 0.0;
        if (std::abs(x) <= window && std::abs(y) <= window) window_min = std::min(window_min, v);
    }
    if (sup <= delta_tol) return Classification::Extinction;
    if (window_min >= top - delta_tol) return Classification::Invasion;
    return Classification::Undecided;
}

double scheme_energy(std::span<const double> field, const UniformGrid& grid, const ReactionCurve& curve,
                     double sigma) {
    if (grid.nodes < 3) throw Error(ErrorCode::GridTooCoarse, "energy needs at least 3 nodes per axis");
    if (field.size() != grid.size()) throw Error(ErrorCode::InvalidArgument, "field size does not match grid");
    const std::size_t n = grid.nodes;
    const double h = grid.dx();
    auto w = [&](std::size_t i) { return (i == 0 || i + 1 == n) ? 0.5 * h : h; };
    double total = 0.0;
    if (grid.dimension == 1) {
        for (std::size_t i = 0; i < n; ++i) total -= w(i) * curve.F(field[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double d = field[i + 1] - field[i];
            total += 0.5 * sigma * d * d / h;
        }
        return total;
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double u = field[j * n + i];
            total -= w(i) * w(j) * curve.F(u);
            if (i + 1 < n) {
                const double d = field[j * n + i + 1] - u;
                total += 0.5 * sigma * w(j) * d * d / h;
            }
            if (j + 1 < n) {
                const double d = field[(j + 1) * n + i] - u;
                total += 0.5 * sigma * w(i) * d * d / h;
            }
        }
    }
    return total;
}

std::vector<EnergySample> energy_trace(const std::vector<Snapshot>& snapshots, const UniformGrid& grid,
                                       const ReactionCurve& curve, double sigma) {
    std::vector<EnergySample> out;
    out.reserve(snapshots.size());
    for (const auto& s : snapshots) out.push_back({s.t, scheme_energy(s.p, grid, curve, sigma)});
    return out;
}

Trajectory simulate(SimState& state, const ReactionCurve& curve, const SimOptions& opts) {
    if (!(opts.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    Stepper stepper(curve, state.grid, state.sigma);
    Trajectory traj;
    std::vector<double> marks = opts.snapshot_times;
    std::sort(marks.begin(), marks.end());
    marks.erase(std::remove_if(marks.begin(), marks.end(), [&](double m) { return m < state.t || m > opts.horizon; }),
                marks.end());
    std::size_t next_mark = 0;
    const double eps = 1e-9 * std::max(1.0, opts.horizon);
    auto take_snapshots = [&] {
        while (next_mark < marks.size() && marks[next_mark] <= state.t + eps) {
            traj.snapshots.push_back({state.t, state.p});
            ++next_mark;
        }
    };
    auto record_energy = [&] { traj.outcome.energy.push_back({state.t, scheme_energy(state.p, state.grid, curve, state.sigma)}); };

    const std::size_t every = std::max<std::size_t>(1, opts.energy_every);
    take_snapshots();
    record_energy();
    auto& outcome = traj.outcome;
    while (state.t < opts.horizon - eps) {
        double dt = std::min(state.dt, opts.horizon - state.t);
        if (next_mark < marks.size()) dt = std::min(dt, marks[next_mark] - state.t);
        if (dt <= eps) dt = state.dt;
        stepper.step(state, dt);
        ++traj.steps;
        take_snapshots();
        if (traj.steps % every == 0) record_energy();
        if (outcome.classification == Classification::Undecided) {
            const auto c = classify(state, curve, opts.delta_tol);
            if (c != Classification::Undecided) {
                outcome.classification = c;
                outcome.decided_at = state.t;
            }
        }
        if (opts.stop_when_decided && outcome.classification != Classification::Undecided && next_mark == marks.size()) {
            break;
        }
    }
    if (outcome.energy.empty() || outcome.energy.back().t != state.t) record_energy();
    // Report the final state: a decision can be revisited only if the field left the region.
    const auto final_class = classify(state, curve, opts.delta_tol);
    if (final_class != outcome.classification) {
        outcome.classification = final_class;
        outcome.decided_at = final_class == Classification::Undecided ? -1.0 : state.t;
    }
    const auto& g = state.grid;
    const std::size_t mid = g.nodes / 2;
    outcome.center_value = g.dimension == 1 ? state.p[mid] : state.p[mid * g.nodes + mid];
    return traj;
}

}  // namespace wolbachia
