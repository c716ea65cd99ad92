// File: presets.hpp
// Description: Named experiment presets expanding to concrete run
// configurations at desk scale

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hal/trainer/config.hpp"

namespace hal::cli {

struct PresetRun {
    std::string label;    // artifact directory below the preset, e.g. "hal" or "hal-fnf"
    trainer::RunConfig config;
};

struct ExperimentPreset {
    std::string name;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> agents;    // distinct labels, in expansion order
    std::vector<PresetRun> runs;        // every label x seed
};

auto preset_names() -> const std::vector<std::string>&;

// Desk-scale base configuration for a task (iron, diamond, treasure).
auto desk_config(const std::string& task) -> trainer::RunConfig;

// Throws ConfigError("preset") for unknown names. An empty seed list keeps
// the preset default of five seeds.
auto expand_preset(const std::string& name, const std::vector<std::uint64_t>& seeds = {}) -> ExperimentPreset;

}    // namespace hal::cli
