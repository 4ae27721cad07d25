#include "wolbachia/probability.hpp"

#include <algorithm>
#include <atomic>
#include <array>
#include <cmath>
#include <numbers>
#include <thread>

#include "wolbachia/errors.hpp"
#include "wolbachia/numerics/optimize.hpp"
#include "wolbachia/numerics/quadrature.hpp"
#include "wolbachia/rng.hpp"

namespace wolbachia {

namespace {

constexpr numerics::QuadOptions kOuter{.rel_tol = 1e-11, .abs_tol = 1e-300, .max_intervals = 2000};

double factorial(std::size_t n) { return std::tgamma(static_cast<double>(n) + 1.0); }

double binom(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
    return r;
}

// gamma_i(0, w).
double chain_density(std::size_t i, double lambda, double w) {
    if (i < 2) throw Error(ErrorCode::InvalidArgument, "gamma needs i >= 2");
    const double top = static_cast<double>(i - 1) * lambda;
    if (w < 0.0 || w > top) return 0.0;
    if (i == 2) return 1.0;
    w = std::min(w, top - w);
    const std::size_t n = i - 1;  // number of convolved indicators
    const std::size_t deg = i - 2;
    double sum = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = w - static_cast<double>(j) * lambda;
        if (x <= 0.0) break;
        const double term = binom(n, j) * std::pow(x, static_cast<double>(deg));
        sum += (j % 2 == 0) ? term : -term;
    }
    return std::max(0.0, sum / factorial(deg));
}

// Sorted, de-duplicated cut points of [a, b].
std::vector<double> pieces(double a, double b, std::vector<double> cuts) {
    std::vector<double> out{a};
    std::sort(cuts.begin(), cuts.end());
    for (double c : cuts) {
        if (c > out.back() + 1e-14 * (1.0 + std::abs(c)) && c < b - 1e-14 * (1.0 + std::abs(b))) out.push_back(c);
    }
    out.push_back(b);
    return out;
}

template <class Func>
double piecewise_gauss(const Func& f, const std::vector<double>& nodes) {
    const auto& rule = numerics::gauss_legendre(16);
    double sum = 0.0;
    for (std::size_t p = 0; p + 1 < nodes.size(); ++p) sum += numerics::fixed_gauss(f, nodes[p], nodes[p + 1], rule);
    return sum;
}

// int_{R*}^{min(r, (i-1) lambda)} gamma_i(0, w) tau_n(r - w - lambda) dw, exact.
double chain_then_free(std::size_t i, std::size_t n, double lambda, double R_star, double r) {
    double hi = std::min(r, static_cast<double>(i - 1) * lambda);
    if (n > 0) hi = std::min(hi, r - lambda);
    if (hi <= R_star) return 0.0;
    std::vector<double> cuts;
    for (std::size_t m = 1; m + 1 < i; ++m) cuts.push_back(static_cast<double>(m) * lambda);
    const double inv_fact = 1.0 / factorial(n);
    auto integrand = [&](double w) {
        const double g = chain_density(i, lambda, w);
        if (n == 0) return g;
        return g * std::pow(std::max(0.0, r - w - lambda), static_cast<double>(n)) * inv_fact;
    };
    return piecewise_gauss(integrand, pieces(R_star, hi, cuts));
}

template <class ShardFn>
std::uint64_t run_sharded(std::uint64_t n_samples, std::uint64_t seed, const McOptions& opts, const ShardFn& shard) {
    if (n_samples == 0) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
    if (opts.shard_size == 0) throw Error(ErrorCode::InvalidArgument, "shard size must be positive");
    const std::uint64_t shards = (n_samples + opts.shard_size - 1) / opts.shard_size;
    std::vector<std::uint64_t> hits(shards, 0);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t s = next++; s < shards; s = next++) {
            const std::uint64_t begin = s * opts.shard_size;
            const std::uint64_t count = std::min(opts.shard_size, n_samples - begin);
            auto gen = derive_stream(seed, s);
            hits[s] = shard(gen, count);
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(shards)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    std::uint64_t total = 0;
    for (auto h : hits) total += h;
    return total;
}

ProbabilityEstimate binomial_estimate(std::uint64_t hits, std::uint64_t n, std::uint64_t seed) {
    ProbabilityEstimate e;
    e.method = EstimateMethod::MonteCarlo;
    e.n_samples = n;
    e.seed = seed;
    e.value = static_cast<double>(hits) / static_cast<double>(n);
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
    return e;
}

}  // namespace

double ProtocolSpec::default_lambda() { return 2.0 * std::sqrt(std::log(2.0)); }

std::size_t minimal_release_count(double lambda, double R_star) {
    if (!(lambda > 0.0) || !(R_star > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda and R* must be positive");
    return static_cast<std::size_t>(std::ceil(R_star / lambda)) + 1;
}

std::size_t ProtocolSpec::k0() const { return minimal_release_count(lambda, R_star); }

void ProtocolSpec::validate() const {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "need k >= 1");
    if (!(L > 0.0)) throw Error(ErrorCode::InvalidBox, "half-box must be positive");
    if (!(lambda > 0.0) || !(R_star > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda and R* must be positive");
}

std::string_view to_string(EstimateMethod m) { return m == EstimateMethod::Exact ? "exact" : "monte_carlo"; }

bool success_criterion(std::span<const double> points, double lambda, double R_star) {
    // 1e-12 relative slack on both thresholds.
    const double gap = lambda * (1.0 + 1e-12), span = R_star * (1.0 - 1e-12);
    std::size_t start = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i] - points[i - 1] > gap) {
            start = i;
        } else if (points[i] - points[start] >= span) {
            return true;
        }
    }
    return false;
}

ProbabilityEstimate mc_success_probability(const ProtocolSpec& spec, std::uint64_t n_samples, std::uint64_t seed,
                                           const McOptions& opts) {
    spec.validate();
    if (n_samples == 0) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
    if (2.0 * spec.L < spec.R_star || static_cast<double>(spec.k) * spec.lambda < spec.R_star) {
        ProbabilityEstimate zero = binomial_estimate(0, n_samples, seed);
        return zero;
    }
    auto shard = [&](std::mt19937_64& gen, std::uint64_t count) {
        std::vector<double> pts(spec.k);
        std::uint64_t hits = 0;
        for (std::uint64_t n = 0; n < count; ++n) {
            for (auto& x : pts) x = uniform(gen, -spec.L, spec.L);
            std::sort(pts.begin(), pts.end());
            if (success_criterion(pts, spec.lambda, spec.R_star)) ++hits;
        }
        return hits;
    };
    return binomial_estimate(run_sharded(n_samples, seed, opts, shard), n_samples, seed);
}

double tau_measure(std::size_t n, double x) {
    if (n == 0) return 1.0;
    if (x <= 0.0) return 0.0;
    return std::pow(x, static_cast<double>(n)) / factorial(n);
}

double gamma_measure(std::size_t i, double lambda, double u, double v) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
    return chain_density(i, lambda, v - u);
}

BetaRecursion::BetaRecursion(double lambda, double R_star, double s_max, std::size_t max_k, std::size_t grid_cells)
    : lambda_(lambda), R_star_(R_star), s_max_(s_max), max_k_(max_k), cells_(grid_cells) {
    k0_ = minimal_release_count(lambda, R_star);
    if (!(s_max >= 0.0)) throw Error(ErrorCode::InvalidArgument, "s_max must be non-negative");
    if (grid_cells < 16) throw Error(ErrorCode::InvalidArgument, "grid needs at least 16 cells");
}

double BetaRecursion::operator()(std::size_t k, double s) const {
    if (k > max_k_) throw Error(ErrorCode::RecursionDepthExceeded, "k above the recursion cap; use Monte Carlo");
    if (s > s_max_ * (1.0 + 1e-12)) throw Error(ErrorCode::DomainError, "span beyond the tabulated range");
    return direct(k, s);
}

double BetaRecursion::ratio(std::size_t k, double s) const {
    const double t = tau_measure(k, s);
    return t > 0.0 ? (*this)(k, s) / t : 0.0;
}

double BetaRecursion::direct(std::size_t k, double s) const {
    if (k < k0_ || s <= R_star_) return 0.0;
    const double lam = lambda_;
    const double R = R_star_;
    double total = 0.0;
    for (std::size_t i = k0_; i <= k; ++i) {
        for (std::size_t j = 1; j + i <= k + 1; ++j) {
            const std::size_t n = k - (i + j - 1);
            // Prefix of j - 1 points in [0, u - lambda] containing no successful run.
            auto prefix = [&](double u) {
                if (j == 1) return 1.0;
                const double x = u - lam;
                if (x <= 0.0) return 0.0;
                return tau_measure(j - 1, x) - lower_level(j - 1, x);
            };
            auto integrand = [&](double u) {
                const double a = prefix(u);
                if (a == 0.0) return 0.0;
                return a * chain_then_free(i, n, lam, R, s - u);
            };
            std::vector<double> cuts;
            for (double r : {R, R + lam}) cuts.push_back(s - r);
            for (std::size_t m = 1; m <= i; ++m) {
                cuts.push_back(s - static_cast<double>(m) * lam);
                cuts.push_back(s - static_cast<double>(m + 1) * lam);
            }
            if (j > 1) {
                cuts.push_back(lam);
                if (j - 1 >= k0_) {
                    cuts.push_back(lam + R);
                    for (std::size_t m = 1; m < j; ++m) cuts.push_back(lam + static_cast<double>(m) * lam);
                }
            }
            const auto nodes = pieces(0.0, s - R, cuts);
            for (std::size_t p = 0; p + 1 < nodes.size(); ++p) {
                total += numerics::integrate(integrand, nodes[p], nodes[p + 1], kOuter).value;
            }
        }
    }
    return total;
}

double BetaRecursion::lower_level(std::size_t j, double x) const {
    if (j < k0_ || x <= R_star_) return 0.0;
    const auto& tab = table(j);
    const double h = s_max_ / static_cast<double>(cells_);
    const double pos = std::clamp(x / h, 0.0, static_cast<double>(cells_));
    // Cubic Lagrange through the four surrounding nodes.
    auto c = static_cast<std::ptrdiff_t>(std::floor(pos)) - 1;
    c = std::clamp<std::ptrdiff_t>(c, 0, static_cast<std::ptrdiff_t>(cells_) - 3);
    const double t = pos - static_cast<double>(c);
    double out = 0.0;
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (b != a) w *= (t - b) / static_cast<double>(a - b);
        }
        out += w * tab[static_cast<std::size_t>(c + a)];
    }
    return out;
}

const std::vector<double>& BetaRecursion::table(std::size_t j) const {
    {
        std::lock_guard lock(mutex_);
        auto it = tables_.find(j);
        if (it != tables_.end()) return it->second;
    }
    std::vector<double> tab(cells_ + 1);
    const double h = s_max_ / static_cast<double>(cells_);
    for (std::size_t q = 0; q <= cells_; ++q) tab[q] = direct(j, h * static_cast<double>(q));
    std::lock_guard lock(mutex_);
    return tables_.emplace(j, std::move(tab)).first->second;
}

double beta_measure(std::size_t k, double lambda, double R_star, double s) {
    return BetaRecursion(lambda, R_star, std::max(s, 0.0))(k, s);
}

ProbabilityEstimate exact_success_probability(const ProtocolSpec& spec) {
    spec.validate();
    ProbabilityEstimate e;
    e.method = EstimateMethod::Exact;
    BetaRecursion beta(spec.lambda, spec.R_star, 2.0 * spec.L);
    e.value = std::clamp(beta.ratio(spec.k, 2.0 * spec.L), 0.0, 1.0);
    return e;
}

double gamma_integral(double lambda, double R_star, double z) {
    const std::size_t k0 = minimal_release_count(lambda, R_star);
    const double hi = std::min(z, static_cast<double>(k0 - 1) * lambda);
    if (hi <= R_star) return 0.0;
    std::vector<double> cuts;
    for (std::size_t m = 1; m + 1 < k0; ++m) cuts.push_back(static_cast<double>(m) * lambda);
    return piecewise_gauss([&](double w) { return chain_density(k0, lambda, w); }, pieces(R_star, hi, cuts));
}

double beta_k0_closed_form(double lambda, double R_star, double s) {
    const std::size_t k0 = minimal_release_count(lambda, R_star);
    if (s <= R_star) return 0.0;
    const double edge = static_cast<double>(k0 - 1) * lambda;
    std::vector<double> cuts;
    for (std::size_t m = 1; m + 1 < k0; ++m) cuts.push_back(static_cast<double>(m) * lambda);
    // int_{R*}^z Gamma = int_{R*}^z (z - w) gamma(0, w) dw.
    auto nested = [&](double z) {
        const double hi = std::min(z, edge);
        if (hi <= R_star) return 0.0;
        return piecewise_gauss([&](double w) { return (z - w) * chain_density(k0, lambda, w); },
                               pieces(R_star, hi, cuts));
    };
    if (s < edge) return nested(s);
    const double f1 = gamma_integral(lambda, R_star, edge);
    return (s - edge) * f1 + nested(edge);
}

K0Constants k0_constants(double lambda, double R_star) {
    K0Constants c;
    c.k0 = minimal_release_count(lambda, R_star);
    const double edge = static_cast<double>(c.k0 - 1) * lambda;
    c.f1 = gamma_integral(lambda, R_star, edge);
    c.f2 = beta_k0_closed_form(lambda, R_star, edge);
    return c;
}

OptimalBox optimal_box_k0(double lambda, double R_star) {
    OptimalBox out;
    out.constants = k0_constants(lambda, R_star);
    const auto& c = out.constants;
    const double k0 = static_cast<double>(c.k0);
    const double two_L = k0 * lambda - k0 / (k0 - 1.0) * c.f2 / c.f1;
    out.L_hat = 0.5 * two_L;
    out.lower_bound = 0.5 * k0 / (k0 - 1.0) * R_star;
    out.bound_holds = out.L_hat >= out.lower_bound * (1.0 - 1e-12);
    out.ratio_at_L_hat = beta_k0_closed_form(lambda, R_star, two_L) / tau_measure(c.k0, two_L);
    return out;
}

double CoverSpec::critical_mass() const {
    return std::pow(2.0 * std::numbers::pi * sigma, 0.5 * dimension) * alpha / (1.0 - alpha) * background;
}

ProbabilityEstimate mc_cover_probability(const CoverSpec& spec, std::uint64_t n_samples, std::uint64_t seed,
                                         const McOptions& opts) {
    if (spec.dimension != 1 && spec.dimension != 2) throw Error(ErrorCode::InvalidArgument, "dimension must be 1 or 2");
    if (!(spec.half_width > 0.0)) throw Error(ErrorCode::InvalidBox, "box half-width must be positive");
    if (spec.k < 1 || !(spec.per_release_mass > 0.0) || !(spec.background > 0.0) || !(spec.sigma > 0.0) ||
        !(spec.radius > 0.0) || !(spec.alpha > 0.0 && spec.alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "invalid cover specification");
    }
    const double h = std::sqrt(2.0 * spec.sigma * std::log(2.0)) / 8.0;
    const auto half_nodes = static_cast<std::ptrdiff_t>(std::floor(spec.half_width / h));
    const std::ptrdiff_t n = 2 * half_nodes + 1;
    // Nodes within `reach` of a centre are tested; the extra cell covers the gaps between nodes.
    const double reach = spec.radius + h;
    const auto m = static_cast<std::ptrdiff_t>(std::ceil(reach / h));
    if (2 * m + 1 > n) return binomial_estimate(0, n_samples, seed);

    const double target = spec.alpha / (1.0 - spec.alpha) * spec.background;  // X >= target <=> p >= alpha
    const int d = spec.dimension;
    const double norm = std::pow(2.0 * std::numbers::pi * spec.sigma, -0.5 * d) * spec.per_release_mass;
    const double cutoff = std::sqrt(2.0 * spec.sigma * 40.0);
    const auto cut_nodes = static_cast<std::ptrdiff_t>(std::ceil(cutoff / h));

    std::vector<std::ptrdiff_t> row_half(static_cast<std::size_t>(m) + 1);
    for (std::ptrdiff_t dy = 0; dy <= m; ++dy) {
        const double rest = reach * reach - static_cast<double>(dy * dy) * h * h;
        row_half[static_cast<std::size_t>(dy)] =
            rest < 0.0 ? -1 : static_cast<std::ptrdiff_t>(std::ceil(std::sqrt(rest) / h));
    }

    auto shard = [&](std::mt19937_64& gen, std::uint64_t count) {
        const std::size_t cells = d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n * n);
        std::vector<double> X(cells);
        std::vector<std::int32_t> bad(cells), prefix(d == 1 ? static_cast<std::size_t>(n + 1)
                                                            : static_cast<std::size_t>(n * (n + 1)));
        std::vector<std::array<double, 2>> centres(spec.k);
        std::uint64_t hits = 0;
        auto coord = [&](std::ptrdiff_t i) { return static_cast<double>(i - half_nodes) * h; };
        for (std::uint64_t s = 0; s < count; ++s) {
            std::fill(X.begin(), X.end(), 0.0);
            for (auto& c : centres) {
                c[0] = uniform(gen, -spec.half_width, spec.half_width);
                c[1] = d == 2 ? uniform(gen, -spec.half_width, spec.half_width) : 0.0;
            }
            for (const auto& c : centres) {
                const auto ix = static_cast<std::ptrdiff_t>(std::lround(c[0] / h)) + half_nodes;
                const auto x0 = std::max<std::ptrdiff_t>(0, ix - cut_nodes);
                const auto x1 = std::min<std::ptrdiff_t>(n - 1, ix + cut_nodes);
                if (d == 1) {
                    for (auto i = x0; i <= x1; ++i) {
                        const double dx = coord(i) - c[0];
                        X[static_cast<std::size_t>(i)] += norm * std::exp(-dx * dx / (2.0 * spec.sigma));
                    }
                } else {
                    const auto iy = static_cast<std::ptrdiff_t>(std::lround(c[1] / h)) + half_nodes;
                    const auto y0 = std::max<std::ptrdiff_t>(0, iy - cut_nodes);
                    const auto y1 = std::min<std::ptrdiff_t>(n - 1, iy + cut_nodes);
                    for (auto j = y0; j <= y1; ++j) {
                        const double dy = coord(j) - c[1];
                        const double ey = std::exp(-dy * dy / (2.0 * spec.sigma));
                        for (auto i = x0; i <= x1; ++i) {
                            const double dx = coord(i) - c[0];
                            X[static_cast<std::size_t>(j * n + i)] += norm * ey * std::exp(-dx * dx / (2.0 * spec.sigma));
                        }
                    }
                }
            }
            for (std::size_t q = 0; q < cells; ++q) bad[q] = X[q] < target ? 1 : 0;
            bool found = false;
            if (d == 1) {
                prefix[0] = 0;
                for (std::ptrdiff_t i = 0; i < n; ++i) prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + bad[static_cast<std::size_t>(i)];
                for (std::ptrdiff_t c = m; c < n - m && !found; ++c) {
                    found = prefix[static_cast<std::size_t>(c + m + 1)] - prefix[static_cast<std::size_t>(c - m)] == 0;
                }
            } else {
                // Row prefix sums: prefix[j * (n + 1) + i] counts bad nodes in row j before column i.
                for (std::ptrdiff_t j = 0; j < n; ++j) {
                    const auto base = static_cast<std::size_t>(j * (n + 1));
                    prefix[base] = 0;
                    for (std::ptrdiff_t i = 0; i < n; ++i) {
                        prefix[base + static_cast<std::size_t>(i + 1)] = prefix[base + static_cast<std::size_t>(i)] + bad[static_cast<std::size_t>(j * n + i)];
                    }
                }
                for (std::ptrdiff_t cy = m; cy < n - m && !found; ++cy) {
                    for (std::ptrdiff_t cx = m; cx < n - m && !found; ++cx) {
                        if (bad[static_cast<std::size_t>(cy * n + cx)]) continue;
                        bool clear = true;
                        for (std::ptrdiff_t dy = -m; dy <= m && clear; ++dy) {
                            const auto w = row_half[static_cast<std::size_t>(std::abs(dy))];
                            if (w < 0) continue;
                            const auto base = static_cast<std::size_t>((cy + dy) * (n + 1));
                            const auto lo = std::max<std::ptrdiff_t>(0, cx - w);
                            const auto hi = std::min<std::ptrdiff_t>(n - 1, cx + w);
                            clear = prefix[base + static_cast<std::size_t>(hi + 1)] == prefix[base + static_cast<std::size_t>(lo)];
                        }
                        found = clear;
                    }
                }
            }
            if (found) ++hits;
        }
        return hits;
    };
    return binomial_estimate(run_sharded(n_samples, seed, opts, shard), n_samples, seed);
}

}  // namespace wolbachia
