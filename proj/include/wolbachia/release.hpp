#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "wolbachia/reaction.hpp"

namespace wolbachia {

/// Sum of k normalized Gaussians of mass N/k each, in dimension 1 or 2.
struct ReleaseProfile {
    int dimension = 1;
    double box_half_width = 1.0;
    double per_site_mass = 0.0;  ///< N / k
    double background = 1e-2;    ///< N0
    std::vector<std::array<double, 2>> centers;
    std::vector<double> variances;

    std::size_t count() const { return centers.size(); }
    double total_mass() const { return per_site_mass * static_cast<double>(centers.size()); }

    /// Released density X at (x, y); y is ignored in 1D.
    double density(double x, double y = 0.0) const;
};

struct ReleaseSampling {
    std::size_t k = 1;
    double total_mass = 1.0;
    double box_half_width = 1.0;
    double sigma0 = 1.0;
    double epsilon = 0.0;
    int dimension = 1;
    double background = 1e-2;
};

/// Centers uniform on [-L, L]^d, variances uniform on [sigma0 - eps, sigma0 + eps].
ReleaseProfile sample_release_profile(const ReleaseSampling& spec, std::uint64_t seed);

/// X / (X + N0).
double initial_frequency(const ReleaseProfile& profile, double x, double y = 0.0);

struct NecWitness {
    bool holds = false;
    double alpha = 0.0;
    double shift = 0.0;
};

/// Searches the grids for (alpha, tau0) with p0(tau) >= v_alpha(tau + tau0). One dimension only.
/// Domination is tested at the bubble's sample radii on both sides.
NecWitness check_nec(const std::function<double(double)>& p0, const ReactionCurve& curve, double sigma,
                     const std::vector<double>& alpha_grid, const std::vector<double>& shift_grid);

NecWitness check_nec(const ReleaseProfile& profile, const ReactionCurve& curve, double sigma,
                     const std::vector<double>& alpha_grid, const std::vector<double>& shift_grid);

/// 64 levels in (theta_c, theta_plus), clustered geometrically towards theta_c.
std::vector<double> default_nec_alpha_grid(const ReactionCurve& curve);

/// Release centers plus a uniform sweep across their range.
std::vector<double> default_nec_shift_grid(const ReleaseProfile& profile, double step);

/// J_alpha(p) = log(p / (1 - p)) + (int_p^alpha dv / (2 sqrt(F(alpha) - F(v))))^2.
double j_alpha(const ReactionCurve& curve, double alpha, double p);
double j_alpha_derivative(const ReactionCurve& curve, double alpha, double p);

struct JMax {
    double p = 0.0;
    double value = 0.0;
};

/// max of J_alpha over (1e-6, alpha].
JMax j_alpha_max(const ReactionCurve& curve, double alpha);

struct SingleReleaseSolution {
    double j_star = 0.0;
    double alpha_star = 0.0;
    double p_star = 0.0;
    double background = 1e-2;

    /// Smallest release N_m = N0 sqrt(2 pi sigma_plus) e^{j*}.
    double minimal_release(double sigma_plus) const;
    /// Largest diffusivity sigma_plus(N) = e^{-2 j*} (N / N0)^2 / (2 pi).
    double max_diffusivity(double N) const;
};

SingleReleaseSolution single_release_threshold(const ReactionCurve& curve, double N0);

struct SpacingSolution {
    std::size_t k = 0;
    double alpha_opt = 0.0;
    double j_star_k = 0.0;
    double n_tilde_star = 0.0;
};

/// j*(k) = min_alpha alpha / (1 - alpha) exp(L_alpha^2 / (2 sigma (k - 1)^2)),
/// N~* = N0 sqrt(2 pi sigma) k j*(k) / 2.
SpacingSolution equally_spaced_requirement(const ReactionCurve& curve, std::size_t k, double sigma, double N0);

}  // namespace wolbachia
