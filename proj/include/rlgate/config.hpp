#pragma once

#include <filesystem>
#include <stdexcept>
#include <string_view>

#include "rlgate/designer.hpp"
#include "rlgate/io.hpp"
#include "rlgate/pulse.hpp"

namespace rlgate {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  EnvironmentSettings environment;
  DesignerConfig designer;
  DragCalibration drag;
  std::filesystem::path output_dir = "out";
  int checkpoint_every = 10;
  bool record_wall_time = false;
  std::size_t bench_shots = 10000;
  bool gaussian_baseline = false;
};

// Every documented key with its default value.
Json default_config_json();

// Deep-merges `patch` into `base`. Keys absent from `base` are rejected so
// typos surface as ConfigError.
void merge_config(Json& base, const Json& patch, const std::string& path = "");

// Applies "dotted.key=value"; the value is parsed as JSON when possible and
// taken as a string otherwise.
void apply_override(Json& config, std::string_view assignment);

// Builds the run configuration. Relative cluster-model paths resolve against
// base_dir. Throws ConfigError on invalid values, MissingArtifact when a
// referenced file is absent.
RunConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = ".");

}  // namespace rlgate
