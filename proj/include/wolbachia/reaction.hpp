#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "wolbachia/numerics/quadrature.hpp"

namespace wolbachia {

/// Biological parameters of the infection-frequency reaction term.
///
/// Defaults are the wMel-like reference set (Rio de Janeiro field estimates):
/// d_s = 0.27/day, s_f = 0.1, s_h = 0.8, delta = 10/9, mu = 0, sigma = 830 m^2/day.
struct ReactionParams {
    double d_s = 0.27;          ///< death rate of uninfected mosquitoes (per day)
    double s_f = 0.1;           ///< fecundity reduction of infected females
    double s_h = 0.8;           ///< cytoplasmic incompatibility strength
    double delta = 10.0 / 9.0;  ///< death-rate ratio infected / uninfected
    double mu = 0.0;            ///< vertical transmission flaw
    double sigma = 830.0;       ///< diffusivity (length^2 / day)

    /// Throws Error(InvalidArgument) when a field is out of range.
    void validate() const;
};

/// Bistable nonlinearity f with its antiderivative F and distinguished roots
/// 0 < theta < theta_c < theta_plus.
///
/// Immutable after construction and safe to share between threads. F is
/// served from a node table filled at construction.
class ReactionCurve {
public:
    using Fn = std::function<double(double)>;

    /// f, f' and f'' as callables on [0, upper].
    struct Derivatives {
        Fn f;
        Fn df;
        Fn d2f;
    };

    /// Builds from explicit derivatives (used for test polynomials). `upper`
    /// bounds the search for theta_plus. Throws NotBistable on a bad sign pattern.
    static ReactionCurve from_functions(Derivatives fns, double upper = 1.0, std::size_t table_cells = 2048);

    double f(double p) const;
    double df(double p) const;
    double d2f(double p) const;

    /// F(p) = int_0^p f.
    double F(double p) const;
    /// int_a^b f, accurate in relative terms even when |b - a| is tiny.
    double F_diff(double a, double b) const;

    double theta() const { return state_->theta; }
    double theta_c() const { return state_->theta_c; }
    double theta_plus() const { return state_->theta_plus; }

    /// Largest |f'| on [0, theta_plus], sampled on the table nodes.
    double max_abs_df() const { return state_->max_abs_df; }

    const std::optional<ReactionParams>& params() const { return state_->params; }

private:
    struct State {
        Derivatives fns;
        std::optional<ReactionParams> params;
        double theta = 0.0;
        double theta_c = 0.0;
        double theta_plus = 1.0;
        double max_abs_df = 0.0;
        double cell = 0.0;
        std::vector<double> table;  // F at nodes k * cell
        const numerics::GaussRule* rule = nullptr;
    };

    explicit ReactionCurve(std::shared_ptr<const State> state) : state_(std::move(state)) {}
    friend ReactionCurve build_reaction(const ReactionParams& params);

    void check_domain(double p) const;
    double local_integral(double a, double b) const;

    std::shared_ptr<const State> state_;
};

/// Rational reaction term for the given biological parameters; roots are
/// located by bracketed bisection and the bistable sign pattern is verified.
ReactionCurve build_reaction(const ReactionParams& params);

/// Unique zero of F in (theta, theta_plus), by bisection.
double find_theta_c(const ReactionCurve& curve);

}  // namespace wolbachia
