#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "wolbachia/reaction.hpp"

namespace wolbachia {

/// One batch run: a scenario plus its keys, all kept as strings so the
/// resolved form can be echoed into the manifest verbatim.
struct ExperimentConfig {
    std::string scenario;
    std::uint64_t seed = 42;
    std::string out = "out";
    unsigned threads = 1;
    ReactionParams reaction;
    std::map<std::string, std::string> keys;
};

/// Scenario names accepted by run_experiment.
const std::vector<std::string>& scenario_names();

/// Default keys of a scenario; throws ConfigInvalid on an unknown name.
const std::map<std::string, std::string>& scenario_keys(const std::string& scenario);

/// Fills defaults; throws ConfigInvalid on an unknown scenario or key.
ExperimentConfig resolve(ExperimentConfig cfg);

/// INI ([experiment], [reaction], [scenario] sections) or a manifest.json.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Reads a [reaction] section from an INI file.
ReactionParams load_reaction_params(const std::filesystem::path& path);

std::string manifest_json(const ExperimentConfig& cfg, const std::vector<std::string>& artifacts);

/// Runs the scenario, writes CSV/JSON artifacts and manifest.json under cfg.out.
/// Human-readable notes go to `log`.
void run_experiment(const ExperimentConfig& cfg, std::ostream& log);

struct FigureOptions {
    std::filesystem::path out = "figures";
    std::uint64_t seed = 42;
    unsigned threads = 1;
    std::uint64_t samples = 100000;  ///< per L point of the probability curves
    std::size_t nodes_2d = 256;
};

void reproduce_figures(const FigureOptions& opts, std::ostream& log);

}  // namespace wolbachia
