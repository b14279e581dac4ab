#pragma once

// JSON surfaces: instance files, matchings, experiment config files and
// per-player debug snapshots. All indices in files are 1-based.

#include <string>

#include <json.hpp>

#include "hmbandit/decentralized.hpp"
#include "hmbandit/harness.hpp"
#include "hmbandit/instances.hpp"
#include "hmbandit/market.hpp"

namespace hmb {

/// {"n": N, "utilities": [[...]], "reward_model": "gaussian" | "bernoulli" | "deterministic"}
nlohmann::ordered_json instance_to_json(const MarketInstance& instance);
MarketInstance instance_from_json(const nlohmann::json& j);

MarketInstance load_instance(const std::string& path);
void save_instance(const MarketInstance& instance, const std::string& path);

/// a[i] = assigned arm of player i, both 1-based.
nlohmann::json matching_to_json(const Matching& matching);
Matching matching_from_json(const nlohmann::json& j);

/// Generator parameters as found under "generator" in a config file.
GeneratorConfig generator_from_json(const nlohmann::json& j);

/// Config file mirroring ExperimentConfig. "instance" is either a path, an
/// inline instance object, or {"generator": {...}}. Relative paths resolve
/// against `base_dir`.
struct ExperimentFile {
  ExperimentConfig config;
  std::string out;
  std::string trace_path;
};
ExperimentFile experiment_from_json(const nlohmann::json& j, const std::string& base_dir = ".");

nlohmann::ordered_json snapshot_json(const EtcPlayer& player, std::uint64_t t);

nlohmann::json read_json_file(const std::string& path);

}  // namespace hmb
