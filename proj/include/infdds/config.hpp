#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "infdds/meta.hpp"

namespace infdds {

/// All validation problems at once, one message per offending key.
struct ConfigError : std::runtime_error {
    std::vector<std::string> problems;
    explicit ConfigError(std::vector<std::string> probs);
};

struct RunSettings {
    std::string corpus;       // manifest path (required by `run`)
    std::string out_dir;      // default from $INFDDS_OUT_DIR, else "runs"
    std::string compare_to;   // optional: another run dir for the paired test
};

struct ExperimentConfig {
    RunSettings run;
    TrainConfig train;
};

// Sectioned key=value text: [section] headers, # comments. Raw form is kept
// as strings so overrides can be applied before validation.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

RawConfig parse_config_text(const std::string& text, const std::string& origin = "config");
RawConfig load_config_file(const std::filesystem::path& path);

// "section.key=value" strings from --set; malformed specs throw ConfigError.
void apply_overrides(RawConfig& raw, const std::vector<std::string>& overrides);

// Validates every key; unknown keys, bad values, and inconsistent settings
// are all reported together.
ExperimentConfig build_config(const RawConfig& raw);

// Full effective configuration with every default echoed, parseable by
// parse_config_text. Rerunning an echo reproduces the run byte-for-byte.
std::string config_echo(const ExperimentConfig& config);

}  // namespace infdds
