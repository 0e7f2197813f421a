#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fingat/data/features.hpp"
#include "fingat/model/fingat.hpp"
#include "fingat/train/trainer.hpp"
#include "json.hpp"

namespace fingat::cli {

// Everything a command needs, serializable so every run directory can carry
// the exact configuration that produced it. Window sizes come from `model`.
struct RunConfig {
  std::filesystem::path prices;
  std::filesystem::path sectors;
  std::filesystem::path cache = "cache/instances.bin";
  std::filesystem::path runs = "runs";
  std::string run_id = "run";

  data::FeatureOptions features;
  double calendar_coverage = 0.9;
  std::array<double, 3> split{0.6, 0.2, 0.2};

  model::ModelConfig model;
  train::TrainConfig train;
  std::vector<std::size_t> ks{1, 5, 10};
  std::vector<std::uint64_t> seeds{1};

  data::InstanceOptions instance_options() const;
  // Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
// Missing keys keep their defaults; wrong types are a ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);

// Applies "a.b.c=value" to j. The value is read as JSON when it parses and
// as a string otherwise. Throws ConfigError on a malformed assignment.
void apply_override(nlohmann::json& j, const std::string& assignment);

// Reads a config file; relative paths inside it resolve against the file's
// directory. Throws ConfigError on a missing file or invalid JSON.
nlohmann::json read_config_json(const std::filesystem::path& path);
RunConfig resolve_paths(RunConfig c, const std::filesystem::path& base);

}  // namespace fingat::cli
