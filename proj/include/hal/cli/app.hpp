// File: app.hpp
// Description: Command-line front end (run, eval, plotdata, presets)

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hal/trainer/config.hpp"

namespace hal::cli {

// Returns the process exit code; errors go to `err` with the offending field.
auto run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) -> int;

// Key-value file or a manifest.json written by a previous run.
auto load_run_config(const std::string& path) -> trainer::RunConfig;

// `--key value` pairs applied on top of a resolved config, then validated.
auto apply_overrides(const trainer::RunConfig& base, const std::vector<std::pair<std::string, std::string>>& overrides)
    -> trainer::RunConfig;

// <root>/<preset>/<label>/<seed>
auto run_directory(const std::filesystem::path& root, const std::string& preset, const std::string& label,
                   std::uint64_t seed) -> std::filesystem::path;

// --out, then HAL_OUT_DIR, then ./runs
auto output_root(const std::string& flag) -> std::filesystem::path;

}    // namespace hal::cli
