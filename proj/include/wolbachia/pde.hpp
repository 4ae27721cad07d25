#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "wolbachia/grid.hpp"
#include "wolbachia/reaction.hpp"
#include "wolbachia/release.hpp"

namespace wolbachia {

/// Frequency field on a zero-flux box. Row-major (y outer) in 2D.
struct SimState {
    UniformGrid grid;
    std::vector<double> p;
    double t = 0.0;
    double sigma = 1.0;
    double dt = 0.0;
    std::size_t clipped = 0;  ///< initial values pulled back into [0, theta_plus]
};

/// min(0.5 / max|f'|, dx^2 / (4 sigma)).
double default_time_step(const ReactionCurve& curve, const UniformGrid& grid, double sigma);

using InitialField = std::function<double(double x, double y)>;

/// Samples `initial` at the nodes. dt <= 0 selects default_time_step.
SimState init_state(const UniformGrid& grid, const InitialField& initial, const ReactionCurve& curve, double sigma,
                    double dt = 0.0);
SimState init_state(const UniformGrid& grid, const ReleaseProfile& release, const ReactionCurve& curve, double sigma,
                    double dt = 0.0);

/// Semi-implicit Euler: (I - dt sigma Lap) p_new = p + dt f(p), mirror boundaries.
/// Tridiagonal solve in 1D, cosine transform in 2D.
class Stepper {
public:
    Stepper(const ReactionCurve& curve, const UniformGrid& grid, double sigma);
    ~Stepper();
    Stepper(const Stepper&) = delete;
    Stepper& operator=(const Stepper&) = delete;

    /// Advances by `dt` (state.dt when <= 0). Throws UnstableStep above 1 / max|f'|.
    void step(SimState& state, double dt = 0.0);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

enum class Classification { Invasion, Extinction, Undecided };
std::string_view to_string(Classification c);

struct EnergySample {
    double t;
    double energy;
};

struct Snapshot {
    double t;
    std::vector<double> p;
};

struct Outcome {
    Classification classification = Classification::Undecided;
    double decided_at = -1.0;
    double center_value = 0.0;
    std::vector<EnergySample> energy;
};

struct SimOptions {
    double horizon = 100.0;
    std::vector<double> snapshot_times;
    double delta_tol = 1e-3;
    /// Stop once decided and every snapshot has been taken.
    bool stop_when_decided = false;
    std::size_t energy_every = 1;  ///< steps between energy samples
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    Outcome outcome;
    std::size_t steps = 0;
};

/// Invasion when p >= theta_plus - tol on the central window [-L/4, L/4]^d,
/// extinction when p <= tol everywhere.
Classification classify(const SimState& state, const ReactionCurve& curve, double delta_tol);

Trajectory simulate(SimState& state, const ReactionCurve& curve, const SimOptions& opts);

/// Energy matching the scheme: squared edge differences and trapezoid weights.
double scheme_energy(std::span<const double> field, const UniformGrid& grid, const ReactionCurve& curve,
                     double sigma);

std::vector<EnergySample> energy_trace(const std::vector<Snapshot>& snapshots, const UniformGrid& grid,
                                       const ReactionCurve& curve, double sigma);

}  // namespace wolbachia
