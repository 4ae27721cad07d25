#include "wolbachia/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "wolbachia/bubble.hpp"
#include "wolbachia/errors.hpp"
#include "wolbachia/pde.hpp"
#include "wolbachia/probability.hpp"
#include "wolbachia/release.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace wolbachia {

namespace {

using KeyMap = std::map<std::string, std::string>;

const std::map<std::string, KeyMap>& scenario_defaults() {
    static const std::map<std::string, KeyMap> table = {
        {"reaction", {{"points", "201"}}},
        {"bubble", {{"alpha", "0.6"}, {"sigma", "1"}, {"samples", "512"}}},
        {"radius", {{"dimension", "1"}, {"sigma", "1"}, {"points", "200"}}},
        {"single-release", {{"N0", "0.01"}, {"sigma_min", "100"}, {"sigma_max", "1000"}, {"steps", "10"}}},
        {"spacing", {{"k", "10"}, {"sigma", "830"}, {"N0", "0.01"}}},
        {"probability",
         {{"k", "80"},
          {"L_min", "auto"},
          {"L_max", "auto"},
          {"steps", "23"},
          {"samples", "1000000"},
          {"exact", "false"},
          {"degraded_constant", "false"},
          {"lambda", "auto"},
          {"R_star", "auto"}}},
        {"cover",
         {{"d", "1"},
          {"alpha", "0.7"},
          {"sigma", "1"},
          {"N0", "0.01"},
          {"mass_multiple", "8"},
          {"box_multiple", "1.25"},
          {"ks", "4,8,16,32,64"},
          {"samples", "20000"}}},
        {"simulate",
         {{"dimension", "1"},
          {"half_width", "50"},
          {"nodes", "1025"},
          {"initial", "bubble"},
          {"alpha", "0.6"},
          {"value", "0.5"},
          {"k", "50"},
          {"box", "25"},
          {"sigma0", "3"},
          {"epsilon", "0"},
          {"N0", "0.01"},
          {"peak_frequency", "0.75"},
          {"file", ""},
          {"sigma", "1"},
          {"horizon", "300"},
          {"snapshots", "0,50,100"},
          {"dt", "0"},
          {"delta_tol", "0.001"},
          {"stop_when_decided", "true"},
          {"energy_every", "1"}}},
        {"appendix-check", {}},
    };
    return table;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v + 0.0);
    return buf;
}

double as_double(const ExperimentConfig& cfg, const std::string& key) {
    const std::string& s = cfg.keys.at(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) invalid("key '" + key + "' is not a finite number: " + s);
        return v;
    } catch (const std::logic_error&) {
        invalid("key '" + key + "' is not a number: " + s);
    }
}

std::size_t as_size(const ExperimentConfig& cfg, const std::string& key) {
    const double v = as_double(cfg, key);
    if (v < 0.0 || v != std::floor(v)) invalid("key '" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

bool as_bool(const ExperimentConfig& cfg, const std::string& key) {
    const std::string& s = cfg.keys.at(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    invalid("key '" + key + "' must be a boolean: " + s);
}

bool is_auto(const ExperimentConfig& cfg, const std::string& key) { return cfg.keys.at(key) == "auto"; }

std::vector<double> as_list(const ExperimentConfig& cfg, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(cfg.keys.at(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::logic_error&) {
            invalid("key '" + key + "' has a non-numeric entry: " + item);
        }
    }
    return out;
}

class Csv {
public:
    Csv(const fs::path& path, const std::string& header) : path_(path), os_(path, std::ios::binary) {
        if (!os_) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
        os_ << header << '\n';
    }
    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) os_ << ',';
            os_ << c;
            first = false;
        }
        os_ << '\n';
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream os_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    os << text;
}

struct Run {
    const ExperimentConfig& cfg;
    std::ostream& log;
    fs::path dir;
    std::vector<std::string> artifacts;

    fs::path file(const std::string& name) {
        artifacts.push_back(name);
        return dir / name;
    }
};

ordered_json reaction_json(const ReactionParams& p) {
    return ordered_json{{"d_s", p.d_s}, {"s_f", p.s_f}, {"s_h", p.s_h}, {"delta", p.delta}, {"mu", p.mu}, {"sigma", p.sigma}};
}

void set_reaction_key(ReactionParams& p, const std::string& key, double v) {
    if (key == "d_s") p.d_s = v;
    else if (key == "s_f") p.s_f = v;
    else if (key == "s_h") p.s_h = v;
    else if (key == "delta") p.delta = v;
    else if (key == "mu") p.mu = v;
    else if (key == "sigma") p.sigma = v;
    else invalid("unknown reaction key '" + key + "'");
}

double dimensionless_R_star(const ReactionCurve& curve) {
    // With sigma = 2 the radius is the bare span integral.
    return min_bubble_radius(curve, 2.0).radius;
}

void scenario_reaction(Run& run, const ReactionCurve& curve) {
    const std::size_t n = as_size(run.cfg, "points");
    if (n < 2) invalid("points must be >= 2");
    Csv csv(run.file("reaction.csv"), "p,f,F");
    for (std::size_t i = 0; i < n; ++i) {
        const double p = curve.theta_plus() * static_cast<double>(i) / static_cast<double>(n - 1);
        csv.row({fmt(p), fmt(curve.f(p)), fmt(curve.F(p))});
    }
    run.log << "theta = " << fmt(curve.theta()) << "\ntheta_c = " << fmt(curve.theta_c())
            << "\ntheta_plus = " << fmt(curve.theta_plus()) << "\nF(theta_plus) = " << fmt(curve.F(curve.theta_plus()))
            << '\n';
}

void scenario_bubble(Run& run, const ReactionCurve& curve) {
    const auto prof = bubble_profile(curve, as_double(run.cfg, "alpha"), as_double(run.cfg, "sigma"),
                                     as_size(run.cfg, "samples"));
    Csv csv(run.file("bubble.csv"), "radius,frequency");
    for (const auto& s : prof.samples) csv.row({fmt(s.radius), fmt(s.frequency)});
    run.log << "L_alpha = " << fmt(prof.support_radius) << '\n';
}

void scenario_radius(Run& run, const ReactionCurve& curve) {
    const int d = static_cast<int>(as_size(run.cfg, "dimension"));
    const double sigma = as_double(run.cfg, "sigma");
    const std::size_t n = as_size(run.cfg, "points");
    if (n < 1) invalid("points must be >= 1");
    Csv csv(run.file("radius.csv"), "alpha,L_alpha,R_alpha,rho_opt,E_bubble");
    const double lo = curve.theta_c(), hi = curve.theta_plus();
    double best_L = std::numeric_limits<double>::infinity(), best_alpha = 0.0;
    double best_R1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double a = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double L = bubble_radius_1d(curve, a, sigma);
        const auto R = energy_radius(curve, a, sigma, d);
        csv.row({fmt(a), fmt(L), fmt(R.radius), fmt(R.rho_opt), fmt(bubble_energy_1d(curve, a, sigma))});
        if (L < best_L) {
            best_L = L;
            best_alpha = a;
        }
        best_R1 = std::min(best_R1, energy_radius_closed_form_1d(curve, a, sigma));
    }
    const auto m = min_bubble_radius(curve, sigma);
    run.log << "grid minimum: alpha = " << fmt(best_alpha) << ", 2 L_alpha / sqrt(2 sigma) = "
            << fmt(2.0 * best_L / std::sqrt(2.0 * sigma)) << '\n'
            << "alpha_0 = " << fmt(m.alpha_0) << ", R* = " << fmt(2.0 * m.radius / std::sqrt(2.0 * sigma)) << '\n';
    // Physical release widths at the configured diffusivity (metres when sigma is in m^2/day).
    const double phys = run.cfg.reaction.sigma;
    const double Lstar = m.radius * std::sqrt(phys / sigma);
    run.log << "release width 2 L* at sigma = " << fmt(phys) << ": " << fmt(2.0 * Lstar) << '\n'
            << "release width 2 min R^(1) at sigma = " << fmt(phys) << ": "
            << fmt(2.0 * best_R1 * std::sqrt(phys / sigma)) << '\n';
}

void scenario_single_release(Run& run, const ReactionCurve& curve) {
    const double N0 = as_double(run.cfg, "N0");
    const auto sol = single_release_threshold(curve, N0);
    const std::size_t steps = as_size(run.cfg, "steps");
    const double s0 = as_double(run.cfg, "sigma_min"), s1 = as_double(run.cfg, "sigma_max");
    if (steps < 1 || !(s0 > 0.0) || s1 < s0) invalid("need steps >= 1 and 0 < sigma_min <= sigma_max");
    Csv csv(run.file("single_release.csv"), "sigma,N_m");
    for (std::size_t i = 0; i < steps; ++i) {
        const double s = steps == 1 ? s0 : s0 + (s1 - s0) * static_cast<double>(i) / static_cast<double>(steps - 1);
        csv.row({fmt(s), fmt(sol.minimal_release(s))});
    }
    run.log << "j* = " << fmt(sol.j_star) << "\nalpha* = " << fmt(sol.alpha_star) << "\np* = " << fmt(sol.p_star)
            << "\nN_m(sigma = " << fmt(run.cfg.reaction.sigma) << ") = " << fmt(sol.minimal_release(run.cfg.reaction.sigma))
            << '\n';
}

void scenario_spacing(Run& run, const ReactionCurve& curve) {
    const auto sol = equally_spaced_requirement(curve, as_size(run.cfg, "k"), as_double(run.cfg, "sigma"),
                                                as_double(run.cfg, "N0"));
    Csv csv(run.file("spacing.csv"), "k,alpha_opt,j_star_k,N_tilde_star");
    csv.row({std::to_string(sol.k), fmt(sol.alpha_opt), fmt(sol.j_star_k), fmt(sol.n_tilde_star)});
    run.log << "alpha_opt = " << fmt(sol.alpha_opt) << ", N~* = " << fmt(sol.n_tilde_star) << '\n';
}

void scenario_probability(Run& run, const ReactionCurve& curve) {
    const auto& cfg = run.cfg;
    const double R_star = is_auto(cfg, "R_star") ? dimensionless_R_star(curve) : as_double(cfg, "R_star");
    double lambda = ProtocolSpec::default_lambda();
    if (as_bool(cfg, "degraded_constant")) lambda = 1.0 / std::sqrt(2.0);
    if (!is_auto(cfg, "lambda")) lambda = as_double(cfg, "lambda");
    const double L_min = is_auto(cfg, "L_min") ? 0.5 * R_star : as_double(cfg, "L_min");
    const double L_max = is_auto(cfg, "L_max") ? 1.5 * R_star : as_double(cfg, "L_max");
    const std::size_t steps = as_size(cfg, "steps");
    if (steps < 1 || !(L_min > 0.0) || L_max < L_min) invalid("need steps >= 1 and 0 < L_min <= L_max");
    const bool exact = as_bool(cfg, "exact");
    const std::size_t k = as_size(cfg, "k");
    const std::uint64_t samples = as_size(cfg, "samples");

    Csv csv(run.file("probability.csv"), "L,estimate,std_error,method");
    double best = -1.0, best_L = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double L =
            steps == 1 ? L_min : L_min + (L_max - L_min) * static_cast<double>(i) / static_cast<double>(steps - 1);
        const ProtocolSpec spec{k, L, lambda, R_star};
        // One seed for every L: the sweep reuses the same uniforms, scaled to each box.
        const auto est = exact ? exact_success_probability(spec)
                               : mc_success_probability(spec, samples, cfg.seed, McOptions{cfg.threads});
        csv.row({fmt(L), fmt(est.value), fmt(est.std_error), std::string(to_string(est.method))});
        if (est.value > best) {
            best = est.value;
            best_L = L;
        }
    }
    const double unit = std::sqrt(2.0 * cfg.reaction.sigma);
    run.log << "lambda = " << fmt(lambda) << ", R* = " << fmt(R_star) << ", k0 = " << minimal_release_count(lambda, R_star)
            << "\nmax estimate " << fmt(best) << " at L = " << fmt(best_L) << " (" << fmt(best_L * unit)
            << " at sigma = " << fmt(cfg.reaction.sigma) << ")\ngap bound lambda sqrt(2 sigma) = " << fmt(lambda * unit)
            << '\n';
}

void scenario_cover(Run& run, const ReactionCurve& curve) {
    const auto& cfg = run.cfg;
    CoverSpec spec;
    spec.dimension = static_cast<int>(as_size(cfg, "d"));
    spec.alpha = as_double(cfg, "alpha");
    spec.sigma = as_double(cfg, "sigma");
    spec.background = as_double(cfg, "N0");
    spec.radius = energy_radius(curve, spec.alpha, spec.sigma, spec.dimension).radius;
    spec.per_release_mass = as_double(cfg, "mass_multiple") * spec.critical_mass();
    spec.half_width = as_double(cfg, "box_multiple") * spec.radius;
    const std::uint64_t samples = as_size(cfg, "samples");
    Csv csv(run.file("cover.csv"), "k,estimate,std_error");
    for (double kd : as_list(cfg, "ks")) {
        if (kd < 1.0 || kd != std::floor(kd)) invalid("ks entries must be positive integers");
        spec.k = static_cast<std::size_t>(kd);
        const auto est = mc_cover_probability(spec, samples, cfg.seed, McOptions{cfg.threads});
        csv.row({std::to_string(spec.k), fmt(est.value), fmt(est.std_error)});
    }
    run.log << "R_alpha = " << fmt(spec.radius) << ", N* = " << fmt(spec.critical_mass()) << ", half-width "
            << fmt(spec.half_width) << '\n';
}

std::vector<double> read_field_file(const std::string& path, std::size_t expected) {
    std::ifstream is(path);
    if (!is) invalid("cannot read initial field file '" + path + "'");
    std::string line;
    std::getline(is, line);  // header
    std::vector<double> values;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find_last_of(',');
        values.push_back(std::stod(comma == std::string::npos ? line : line.substr(comma + 1)));
    }
    if (values.size() != expected) invalid("initial field file has " + std::to_string(values.size()) + " rows, grid has " + std::to_string(expected));
    return values;
}

void scenario_simulate(Run& run, const ReactionCurve& curve) {
    const auto& cfg = run.cfg;
    UniformGrid grid;
    grid.dimension = static_cast<int>(as_size(cfg, "dimension"));
    grid.half_width = as_double(cfg, "half_width");
    grid.nodes = as_size(cfg, "nodes");
    const double sigma = as_double(cfg, "sigma");
    const double dt = as_double(cfg, "dt");
    const std::string kind = cfg.keys.at("initial");

    SimState state;
    if (kind == "bubble") {
        const auto prof = bubble_profile(curve, as_double(cfg, "alpha"), sigma, 4096);
        state = init_state(grid, [&](double x, double y) { return prof(std::hypot(x, y)); }, curve, sigma, dt);
    } else if (kind == "constant") {
        const double v = as_double(cfg, "value");
        state = init_state(grid, [&](double, double) { return v; }, curve, sigma, dt);
    } else if (kind == "release") {
        const double q = as_double(cfg, "peak_frequency");
        if (!(q > 0.0 && q < 1.0)) invalid("peak_frequency must lie in (0, 1)");
        ReleaseSampling rs;
        rs.k = as_size(cfg, "k");
        rs.box_half_width = as_double(cfg, "box");
        rs.sigma0 = as_double(cfg, "sigma0");
        rs.epsilon = as_double(cfg, "epsilon");
        rs.dimension = grid.dimension;
        rs.background = as_double(cfg, "N0");
        const double peak_density = q / (1.0 - q) * rs.background;
        rs.total_mass = static_cast<double>(rs.k) * peak_density * std::pow(2.0 * std::numbers::pi * rs.sigma0, 0.5 * grid.dimension);
        state = init_state(grid, sample_release_profile(rs, cfg.seed), curve, sigma, dt);
    } else if (kind == "file") {
        const auto values = read_field_file(cfg.keys.at("file"), grid.size());
        const std::size_t n = grid.nodes;
        state = init_state(
            grid,
            [&](double x, double y) {
                const auto i = static_cast<std::size_t>(std::lround((x + grid.half_width) / grid.dx()));
                const auto j = grid.dimension == 2 ? static_cast<std::size_t>(std::lround((y + grid.half_width) / grid.dx())) : 0;
                return values[j * n + i];
            },
            curve, sigma, dt);
    } else {
        invalid("initial must be bubble, release, constant or file");
    }
    if (static_cast<double>(state.clipped) > 1e-3 * static_cast<double>(state.p.size())) {
        run.log << "warning: " << state.clipped << " initial values clipped into [0, theta_plus]\n";
    }

    SimOptions opts;
    opts.horizon = as_double(cfg, "horizon");
    opts.snapshot_times = as_list(cfg, "snapshots");
    opts.delta_tol = as_double(cfg, "delta_tol");
    opts.stop_when_decided = as_bool(cfg, "stop_when_decided");
    opts.energy_every = std::max<std::size_t>(1, as_size(cfg, "energy_every"));
    const auto traj = simulate(state, curve, opts);

    const std::size_t n = grid.nodes;
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
        const auto& snap = traj.snapshots[s];
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%02zu.csv", s);
        Csv csv(run.file(name), grid.dimension == 1 ? "x,p" : "x,y,p");
        for (std::size_t q = 0; q < snap.p.size(); ++q) {
            if (grid.dimension == 1) {
                csv.row({fmt(grid.coordinate(q)), fmt(snap.p[q])});
            } else {
                csv.row({fmt(grid.coordinate(q % n)), fmt(grid.coordinate(q / n)), fmt(snap.p[q])});
            }
        }
    }
    ordered_json summary;
    summary["classification"] = std::string(to_string(traj.outcome.classification));
    summary["decided_at"] = traj.outcome.decided_at;
    summary["center_value"] = traj.outcome.center_value;
    summary["steps"] = traj.steps;
    summary["clipped"] = state.clipped;
    ordered_json times = ordered_json::array();
    for (const auto& s : traj.snapshots) times.push_back(s.t);
    summary["snapshot_times"] = times;
    ordered_json trace = ordered_json::array();
    for (const auto& e : traj.outcome.energy) trace.push_back({e.t, e.energy});
    summary["energy_trace"] = trace;
    write_text(run.file("summary.json"), summary.dump(2) + "\n");
    run.log << "classification = " << to_string(traj.outcome.classification) << " at t = " << fmt(traj.outcome.decided_at)
            << '\n';
}

void scenario_appendix(Run& run, const ReactionCurve& curve) {
    const auto rep = check_uniqueness(curve);
    ordered_json j;
    j["b0_ok"] = rep.b0_ok;
    j["b1_ok"] = rep.b1_ok;
    j["b2_ok"] = rep.b2_ok;
    j["b3_ok"] = rep.b3_ok;
    j["alpha_1"] = rep.alpha_1;
    j["alpha_0"] = rep.alpha_0;
    j["h_at_alpha0"] = rep.h_at_alpha0;
    j["h_increasing"] = rep.h_increasing;
    j["h_crossings"] = rep.h_crossings;
    auto pairs = [](const std::vector<ProfileSample>& v) {
        ordered_json a = ordered_json::array();
        for (const auto& s : v) a.push_back({s.radius, s.frequency});
        return a;
    };
    j["g_samples"] = pairs(rep.g_samples);
    j["h_samples"] = pairs(rep.h_samples);
    const std::string text = j.dump(2) + "\n";
    write_text(run.file("appendix.json"), text);
    run.log << text;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, keys] : scenario_defaults()) v.push_back(name);
        return v;
    }();
    return names;
}

const std::map<std::string, std::string>& scenario_keys(const std::string& scenario) {
    const auto it = scenario_defaults().find(scenario);
    if (it == scenario_defaults().end()) invalid("unknown scenario '" + scenario + "'");
    return it->second;
}

ExperimentConfig resolve(ExperimentConfig cfg) {
    if (cfg.scenario.empty()) invalid("no scenario given");
    const auto it = scenario_defaults().find(cfg.scenario);
    if (it == scenario_defaults().end()) invalid("unknown scenario '" + cfg.scenario + "'");
    for (const auto& [key, value] : cfg.keys) {
        if (!it->second.contains(key)) invalid("unknown key '" + key + "' for scenario " + cfg.scenario);
    }
    for (const auto& [key, value] : it->second) cfg.keys.try_emplace(key, value);
    if (cfg.out.empty()) invalid("output directory must not be empty");
    try {
        cfg.reaction.validate();
    } catch (const Error& e) {
        invalid(std::string("reaction parameters: ") + e.what());
    }
    return cfg;
}

ReactionParams load_reaction_params(const fs::path& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path.string(), tree);
    } catch (const std::exception& e) {
        invalid(std::string("cannot parse ") + path.string() + ": " + e.what());
    }
    ReactionParams p;
    for (const auto& [section, body] : tree) {
        if (section != "reaction") invalid("unexpected section [" + section + "] in parameter file");
        for (const auto& [key, value] : body) {
            try {
                set_reaction_key(p, key, std::stod(value.data()));
            } catch (const std::logic_error&) {
                invalid("reaction key '" + key + "' is not a number");
            }
        }
    }
    return p;
}

ExperimentConfig load_config(const fs::path& path) {
    ExperimentConfig cfg;
    if (path.extension() == ".json") {
        std::ifstream is(path);
        if (!is) invalid("cannot read " + path.string());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(is);
        } catch (const std::exception& e) {
            invalid(std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) invalid("manifest must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "scenario") cfg.scenario = value.get<std::string>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "threads") cfg.threads = value.get<unsigned>();
            else if (key == "out") cfg.out = value.get<std::string>();
            else if (key == "reaction") {
                for (const auto& [rk, rv] : value.items()) set_reaction_key(cfg.reaction, rk, rv.get<double>());
            } else if (key == "keys") {
                for (const auto& [kk, kv] : value.items()) cfg.keys[kk] = kv.get<std::string>();
            } else if (key != "artifacts") {
                invalid("unknown manifest field '" + key + "'");
            }
        }
        return cfg;
    }
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path.string(), tree);
    } catch (const std::exception& e) {
        invalid(std::string("cannot parse ") + path.string() + ": " + e.what());
    }
    for (const auto& [section, body] : tree) {
        if (section == "experiment") {
            for (const auto& [key, value] : body) {
                const std::string v = value.data();
                if (key == "scenario") cfg.scenario = v;
                else if (key == "seed") cfg.seed = std::stoull(v);
                else if (key == "threads") cfg.threads = static_cast<unsigned>(std::stoul(v));
                else if (key == "out") cfg.out = v;
                else invalid("unknown key '" + key + "' in [experiment]");
            }
        } else if (section == "reaction") {
            for (const auto& [key, value] : body) {
                try {
                    set_reaction_key(cfg.reaction, key, std::stod(value.data()));
                } catch (const std::logic_error&) {
                    invalid("reaction key '" + key + "' is not a number");
                }
            }
        } else if (section == "scenario") {
            for (const auto& [key, value] : body) cfg.keys[key] = value.data();
        } else {
            invalid("unknown section [" + section + "]");
        }
    }
    return cfg;
}

std::string manifest_json(const ExperimentConfig& cfg, const std::vector<std::string>& artifacts) {
    ordered_json j;
    j["scenario"] = cfg.scenario;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["out"] = cfg.out;
    j["reaction"] = reaction_json(cfg.reaction);
    ordered_json keys = ordered_json::object();
    for (const auto& [k, v] : cfg.keys) keys[k] = v;
    j["keys"] = keys;
    j["artifacts"] = artifacts;
    return j.dump(2) + "\n";
}

void run_experiment(const ExperimentConfig& raw, std::ostream& log) {
    const ExperimentConfig cfg = resolve(raw);
    Run run{cfg, log, fs::path(cfg.out), {}};
    fs::create_directories(run.dir);
    const ReactionCurve curve = build_reaction(cfg.reaction);
    const std::string& s = cfg.scenario;
    try {
        if (s == "reaction") scenario_reaction(run, curve);
        else if (s == "bubble") scenario_bubble(run, curve);
        else if (s == "radius") scenario_radius(run, curve);
        else if (s == "single-release") scenario_single_release(run, curve);
        else if (s == "spacing") scenario_spacing(run, curve);
        else if (s == "probability") scenario_probability(run, curve);
        else if (s == "cover") scenario_cover(run, curve);
        else if (s == "simulate") scenario_simulate(run, curve);
        else if (s == "appendix-check") scenario_appendix(run, curve);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigInvalid) throw;
        throw Error(e.code(), "[" + s + "] " + e.what());
    }
    write_text(run.dir / "manifest.json", manifest_json(cfg, run.artifacts));
}

namespace {

ExperimentConfig figure_config(const FigureOptions& opts, const std::string& scenario, const fs::path& dir,
                               KeyMap keys) {
    ExperimentConfig cfg;
    cfg.scenario = scenario;
    cfg.seed = opts.seed;
    cfg.threads = opts.threads;
    cfg.out = dir.string();
    cfg.keys = std::move(keys);
    return cfg;
}

}  // namespace

void reproduce_figures(const FigureOptions& opts, std::ostream& log) {
    const fs::path root = opts.out;
    fs::create_directories(root);
    const std::string samples = std::to_string(opts.samples);

    log << "== reaction profile\n";
    run_experiment(figure_config(opts, "reaction", root / "fig_reaction", {{"points", "401"}}), log);
    write_text(root / "fig_reaction" / "README.md",
               "# Reaction term\n\nreaction.csv: `p` (horizontal axis), `f` = f(p) and `F` = F(p) "
               "(vertical axis). F changes sign at theta_c.\n");

    log << "== radius comparison\n";
    for (const char* d : {"1", "2"}) {
        const fs::path dir = root / "fig_radius" / (std::string("d") + d);
        run_experiment(figure_config(opts, "radius", dir, {{"dimension", d}, {"points", "200"}}), log);
    }
    write_text(root / "fig_radius" / "README.md",
               "# Bubble radius against level\n\nd1/radius.csv and d2/radius.csv, sigma = 1: `alpha` "
               "(horizontal axis), `L_alpha` (exact one-dimensional half-width), `R_alpha` (energy-method "
               "radius in dimension d), `rho_opt`, `E_bubble` (energy of the exact bubble).\n");

    log << "== success probability, k = 20..80\n";
    for (int k = 20; k <= 80; k += 10) {
        const fs::path dir = root / "fig_probability" / ("k" + std::to_string(k));
        run_experiment(figure_config(opts, "probability", dir, {{"k", std::to_string(k)}, {"samples", samples}}), log);
    }
    write_text(root / "fig_probability" / "README.md",
               "# Success probability against box size\n\nk<k>/probability.csv for k = 20, 30, ..., 80: `L` "
               "(half-width of the release box in units of sqrt(2 sigma), horizontal axis), `estimate` "
               "(vertical axis), `std_error`, `method`. lambda = 2 sqrt(log 2).\n");

    log << "== degraded constant\n";
    run_experiment(figure_config(opts, "probability", root / "fig_degraded",
                                 {{"k", "80"}, {"samples", samples}, {"degraded_constant", "true"}}),
                   log);
    write_text(root / "fig_degraded" / "README.md",
               "# Degraded gap constant\n\nprobability.csv as in fig_probability for k = 80 with lambda = "
               "1/sqrt(2); k0 is printed in the log.\n");

    log << "== two-dimensional dynamics\n";
    const std::vector<std::pair<std::string, std::string>> boxes = {
        {"box_2L_over_3", fmt(100.0 / 3.0)}, {"box_L_over_2", "25"}, {"box_L_over_12.5", "4"}};
    for (const auto& [name, half] : boxes) {
        auto cfg = figure_config(opts, "simulate", root / "fig_2d" / name,
                                 {{"dimension", "2"},
                                  {"half_width", "50"},
                                  {"nodes", std::to_string(opts.nodes_2d)},
                                  {"initial", "release"},
                                  {"k", "50"},
                                  {"box", half},
                                  {"sigma0", "3"},
                                  {"peak_frequency", "0.75"},
                                  {"sigma", "4"},
                                  {"horizon", "400"},
                                  {"snapshots", "0,1,25,50,75"},
                                  {"stop_when_decided", "true"},
                                  {"energy_every", "100"}});
        cfg.seed = 7;
        run_experiment(cfg, log);
    }
    write_text(root / "fig_2d" / "README.md",
               "# Two-dimensional dynamics\n\nOne directory per release box (half-widths 2L/3, L/2, L/12.5 "
               "with L = 50). snapshot_NN.csv: `x`, `y`, `p` at t = 0, 1, 25, 50, 75; summary.json holds "
               "the classification and the energy trace. 50 releases, peak frequency 0.75 each, release "
               "variance 3, diffusivity 4, release seed 7.\n");
}

}  // namespace wolbachia
