#pragma once

#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "hasprof/eval.hpp"
#include "hasprof/phase_profiler.hpp"
#include "hasprof/synth_gen.hpp"

namespace hasprof {

// Every knob of the pipeline; defaults are the published parameter set.
struct Config {
  ProfilerParams profiler;
  GeneratorDefaults generator;
  AcceptanceThresholds thresholds;

  void validate() const {
    profiler.validate();
    generator.validate();
  }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing keys keep their defaults. Wrong types, unknown keys and invariant
// violations throw ConfigError naming the field.
Config config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Config& config);
Config load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const Config& config);

ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioSpec& spec);
ScenarioSpec load_scenario(const std::filesystem::path& path);

}  // namespace hasprof
