#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "wolbachia/errors.hpp"
#include "wolbachia/experiment.hpp"

using namespace wolbachia;

namespace {

const std::map<std::string, std::string> kFlagKeys = {
    {"exact", "--exact"}, {"degraded_constant", "--degraded-constant"}, {"stop_when_decided", "--stop-when-decided"}};

std::string option_name(std::string key) {
    for (auto& c : key) {
        if (c == '_') c = '-';
    }
    return "--" + key;
}

struct Sub {
    CLI::App* app = nullptr;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::string config;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial spread of Wolbachia releases"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 42;
    std::string out = "out";
    unsigned threads = 1;
    std::string params;
    app.add_option("--seed", seed, "RNG seed")->capture_default_str();
    app.add_option("--out", out, "output directory")->capture_default_str();
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")->capture_default_str();
    app.add_option("--params", params, "INI file with a [reaction] section");

    std::map<std::string, Sub> subs;
    for (const auto& name : scenario_names()) {
        Sub& sub = subs[name];
        sub.app = app.add_subcommand(name, "run the " + name + " scenario");
        for (const auto& [key, def] : scenario_keys(name)) {
            if (kFlagKeys.contains(key)) {
                sub.flags[key] = false;
                sub.app->add_flag(kFlagKeys.at(key), sub.flags[key]);
            } else {
                sub.values[key];
                sub.app->add_option(option_name(key), sub.values[key], "default: " + (def.empty() ? "\"\"" : def));
            }
        }
        if (name == "simulate") sub.app->add_option("--config", sub.config, "INI or manifest.json");
    }

    std::string run_config;
    auto* run = app.add_subcommand("run", "run a scenario from an INI file or a manifest.json");
    run->add_option("--config", run_config)->required();

    FigureOptions fig;
    auto* figs = app.add_subcommand("reproduce-figures", "regenerate all figure data");
    figs->add_option("--samples", fig.samples, "Monte Carlo samples per L point")->capture_default_str();
    figs->add_option("--nodes-2d", fig.nodes_2d, "grid nodes per axis for the 2D runs")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (figs->parsed()) {
            fig.out = app.get_option("--out")->count() ? out : "figures";
            fig.seed = seed;
            fig.threads = threads;
            reproduce_figures(fig, std::cout);
            return 0;
        }
        ExperimentConfig cfg;
        bool from_file = false;
        if (run->parsed()) {
            cfg = load_config(run_config);
            from_file = true;
        } else {
            for (auto& [name, sub] : subs) {
                if (!sub.app->parsed()) continue;
                if (!sub.config.empty()) {
                    cfg = load_config(sub.config);
                    from_file = true;
                    if (cfg.scenario.empty()) cfg.scenario = name;
                    if (cfg.scenario != name) {
                        throw Error(ErrorCode::ConfigInvalid, "config is for scenario " + cfg.scenario);
                    }
                }
                cfg.scenario = name;
                for (const auto& [key, value] : sub.values) {
                    if (sub.app->get_option(option_name(key))->count()) cfg.keys[key] = value;
                }
                for (const auto& [key, on] : sub.flags) {
                    if (on) cfg.keys[key] = "true";
                }
            }
        }
        if (!params.empty()) cfg.reaction = load_reaction_params(params);
        if (!from_file || app.get_option("--seed")->count()) cfg.seed = seed;
        if (!from_file || app.get_option("--out")->count()) cfg.out = out;
        if (!from_file || app.get_option("--threads")->count()) cfg.threads = threads;
        run_experiment(cfg, std::cout);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::ConfigInvalid ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
