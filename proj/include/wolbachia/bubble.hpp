#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wolbachia/grid.hpp"
#include "wolbachia/reaction.hpp"

namespace wolbachia {

/// One point of a radial profile.
struct ProfileSample {
    double radius;
    double frequency;
};

/// Critical alpha-bubble in one dimension: the decreasing branch of
/// sigma u'' + f(u) = 0, u(0) = alpha, u'(0) = 0, cut at its first zero.
struct BubbleProfile {
    double alpha = 0.0;
    double sigma = 1.0;
    double support_radius = 0.0;       ///< L_alpha
    std::vector<ProfileSample> samples;  ///< radius ascending, frequency descending to 0

    /// v_alpha(|x|), linear in radius between samples, 0 outside the support.
    double operator()(double x) const;
};

/// Energy-method radius for a piecewise-linear radial trial function.
struct RadiusEstimate {
    double alpha = 0.0;
    int dimension = 1;
    double radius = 0.0;
    double rho_opt = 0.0;
    bool feasible = false;
};

struct MinimalRadius {
    double alpha_0 = 0.0;
    double radius = 0.0;  ///< L* = L_{alpha_0}
    bool multiple_minima_suspected = false;
    /// Root of h(alpha) = -2, present when the uniqueness assumptions hold.
    std::optional<double> alpha_from_h;
};

struct UniquenessReport {
    bool b0_ok = false;
    bool b1_ok = false;
    bool b2_ok = false;
    bool b3_ok = false;
    double alpha_1 = 0.0;
    double alpha_0 = 0.0;
    double h_at_alpha0 = 0.0;
    bool h_increasing = false;
    int h_crossings = 0;  ///< sign changes of h + 2 on the sampled grid
    std::vector<ProfileSample> g_samples;  ///< (x, g(x))
    std::vector<ProfileSample> h_samples;  ///< (alpha, h(alpha))

    bool all_hold() const { return b0_ok && b1_ok && b2_ok && b3_ok; }
};

/// int_omega^alpha dv / sqrt(F(alpha) - F(v)); equals 2 L_alpha / sqrt(2 sigma) at omega = 0.
double span_integral(const ReactionCurve& curve, double alpha, double omega = 0.0);

/// Radius at which the alpha-bubble takes the value omega.
double chi(const ReactionCurve& curve, double alpha, double omega, double sigma);

/// Half-width L_alpha of the alpha-bubble support.
double bubble_radius_1d(const ReactionCurve& curve, double alpha, double sigma);

BubbleProfile bubble_profile(const ReactionCurve& curve, double alpha, double sigma, std::size_t n_samples);

/// Ground state u_{theta_c}, evaluated by inverting chi_{theta_c}; exponential
/// tail once the value drops below 1e-4 theta_c.
class GroundState {
public:
    GroundState(const ReactionCurve& curve, double sigma);

    double operator()(double x) const;
    double decay_rate() const { return rate_; }

private:
    const ReactionCurve* curve_;
    double sigma_;
    double rate_;
    double u_switch_;
    double x_switch_;
};

double ground_state(const ReactionCurve& curve, double sigma, double x);

/// Discrete energy sum (sigma/2)|grad u|^2 - F(u) with trapezoid weights and
/// centred differences (one-sided at the boundary). Row-major in 2D.
double energy(std::span<const double> field, const UniformGrid& grid, const ReactionCurve& curve, double sigma);

/// Energy of the exact alpha-bubble; -infinity at a stable root alpha = theta_plus.
double bubble_energy_1d(const ReactionCurve& curve, double alpha, double sigma);

/// U(alpha) = F(alpha) - V(alpha), V(alpha) = (1/alpha) int_0^alpha F.
double potential_U(const ReactionCurve& curve, double alpha);
double potential_V(const ReactionCurve& curve, double alpha);

/// 2 sqrt(sigma) alpha sqrt(U) / F(alpha), the one-dimensional optimum.
double energy_radius_closed_form_1d(const ReactionCurve& curve, double alpha, double sigma);
double rho_star_1d(const ReactionCurve& curve, double alpha);

RadiusEstimate energy_radius(const ReactionCurve& curve, double alpha, double sigma, int dimension);

MinimalRadius min_bubble_radius(const ReactionCurve& curve, double sigma);

/// g(x) = x f'(x) / f(x), with g(0) = 1.
double g_function(const ReactionCurve& curve, double x);

/// h(alpha); dL_alpha/dalpha = 0 exactly when h(alpha) = -2.
double h_function(const ReactionCurve& curve, double alpha);

UniquenessReport check_uniqueness(const ReactionCurve& curve);

}  // namespace wolbachia
