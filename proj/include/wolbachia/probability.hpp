#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string_view>
#include <vector>

namespace wolbachia {

/// Geometric protocol in dimensionless units (positions divided by sqrt(2 sigma)).
struct ProtocolSpec {
    std::size_t k = 1;
    double L = 1.0;  ///< half-width of the release box
    double lambda = 0.0;
    double R_star = 0.0;

    /// 2 sqrt(log 2): largest gap keeping two unit Gaussians above one peak.
    static double default_lambda();

    std::size_t k0() const;
    void validate() const;
};

/// ceil(R* / lambda) + 1.
std::size_t minimal_release_count(double lambda, double R_star);

enum class EstimateMethod { Exact, MonteCarlo };
std::string_view to_string(EstimateMethod m);

struct ProbabilityEstimate {
    double value = 0.0;
    EstimateMethod method = EstimateMethod::Exact;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
};

/// True iff a maximal run of gaps <= lambda spans at least R*. Points must be ascending.
bool success_criterion(std::span<const double> points, double lambda, double R_star);

struct McOptions {
    unsigned threads = 1;
    std::uint64_t shard_size = 65536;  ///< samples per RNG stream; fixes the result independently of threads
};

ProbabilityEstimate mc_success_probability(const ProtocolSpec& spec, std::uint64_t n_samples, std::uint64_t seed,
                                           const McOptions& opts = {});

/// tau_n(0, x) = x_+^n / n!, with tau_0 = 1.
double tau_measure(std::size_t n, double x);

/// gamma_i(u, v): measure of chains u = y_1 <= ... <= y_i = v with gaps <= lambda.
double gamma_measure(std::size_t i, double lambda, double u, double v);

/// Exact beta_k(s), s = chi + L, by the leftmost-run recursion. Lower levels needed by
/// the recursion are tabulated on [0, s_max] and interpolated.
class BetaRecursion {
public:
    BetaRecursion(double lambda, double R_star, double s_max, std::size_t max_k = 24, std::size_t grid_cells = 2048);

    double operator()(std::size_t k, double s) const;
    /// beta_k(s) / tau_k(s).
    double ratio(std::size_t k, double s) const;

    std::size_t k0() const { return k0_; }
    double lambda() const { return lambda_; }
    double R_star() const { return R_star_; }

private:
    double direct(std::size_t k, double s) const;
    double lower_level(std::size_t j, double x) const;
    const std::vector<double>& table(std::size_t j) const;

    double lambda_;
    double R_star_;
    double s_max_;
    std::size_t max_k_;
    std::size_t cells_;
    std::size_t k0_;
    mutable std::mutex mutex_;
    mutable std::map<std::size_t, std::vector<double>> tables_;
};

double beta_measure(std::size_t k, double lambda, double R_star, double s);

ProbabilityEstimate exact_success_probability(const ProtocolSpec& spec);

struct K0Constants {
    std::size_t k0 = 0;
    double f1 = 0.0;
    double f2 = 0.0;
};

K0Constants k0_constants(double lambda, double R_star);

/// Gamma(z) = int_{R*}^z gamma_{k0}(0, w) dw.
double gamma_integral(double lambda, double R_star, double z);

/// beta_{k0}(s) in closed form: 0, int_{R*}^s Gamma, or (s - (k0 - 1) lambda) f1 + f2.
double beta_k0_closed_form(double lambda, double R_star, double s);

struct OptimalBox {
    K0Constants constants;
    double L_hat = 0.0;
    double lower_bound = 0.0;  ///< k0 / (k0 - 1) R* / 2, the guaranteed floor for L_hat
    double ratio_at_L_hat = 0.0;
    bool bound_holds = false;
};

OptimalBox optimal_box_k0(double lambda, double R_star);

/// Random covering: k releases of mass N each, variance sigma, uniform centres in
/// [-half_width, half_width]^d. Success when the frequency N sum G / (N sum G + N0)
/// stays >= alpha on some ball of radius `radius` inside the box.
struct CoverSpec {
    std::size_t k = 1;
    double per_release_mass = 1.0;
    double background = 1e-2;
    double half_width = 1.0;
    double alpha = 0.5;
    double sigma = 1.0;
    double radius = 1.0;
    int dimension = 1;

    /// (2 pi sigma)^{d/2} alpha / (1 - alpha) N0.
    double critical_mass() const;
};

ProbabilityEstimate mc_cover_probability(const CoverSpec& spec, std::uint64_t n_samples, std::uint64_t seed,
                                         const McOptions& opts = {});

}  // namespace wolbachia
