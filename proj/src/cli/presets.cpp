// File: presets.cpp
// Description: Experiment presets

#include "hal/cli/presets.hpp"

#include <cstdio>
#include <functional>

#include "hal/common/error.hpp"

namespace hal::cli {

using trainer::RunConfig;
using agents::Variant;

namespace {

struct Variation {
    std::string label;
    std::function<void(RunConfig&)> apply;
};

auto agent(Variant v, const std::string& suffix = "", std::function<void(RunConfig&)> extra = {}) -> Variation {
    return {agents::to_string(v) + suffix, [v, extra](RunConfig& c) {
                c.agent = v;
                if (extra) {
                    extra(c);
                }
            }};
}

auto number_label(double v) -> std::string {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

auto expand(const std::string& name, const std::string& task, const std::vector<Variation>& variations,
            const std::vector<std::uint64_t>& seeds) -> ExperimentPreset {
    ExperimentPreset p;
    p.name = name;
    p.seeds = seeds;
    for (const auto& v : variations) {
        p.agents.push_back(v.label);
    }
    for (const auto& v : variations) {
        for (const auto seed : seeds) {
            RunConfig c = desk_config(task);
            c.preset = name;
            c.seed = seed;
            v.apply(c);
            c.validate();
            p.runs.push_back({v.label, std::move(c)});
        }
    }
    return p;
}

auto learning_agents() -> std::vector<Variation> {
    return {agent(Variant::HalOracle), agent(Variant::Hal), agent(Variant::HRainbowHer), agent(Variant::HRainbow),
            agent(Variant::RainbowDense)};
}

}    // namespace

auto preset_names() -> const std::vector<std::string>& {
    static const std::vector<std::string> names = {"learning_iron", "learning_treasure", "milestone_robustness",
                                                   "stochasticity", "task_agnostic", "ablations", "hparam_sweep"};
    return names;
}

auto desk_config(const std::string& task) -> RunConfig {
    RunConfig c;
    c.task = task;
    c.net.conv = {16};
    c.net.hidden = {128};
    c.aff.conv = {16};
    c.aff.hidden = {128};
    c.log_interval = 10000;
    c.steps = 300000;
    if (task == "treasure") {
        c.gen.room_size = 3;
        c.max_env_steps = 500;
    } else {
        c.gen.rows = 10;
        c.gen.cols = 10;
        c.recipes = "desk";
        c.max_env_steps = 1000;
    }
    return c;
}

auto expand_preset(const std::string& name, const std::vector<std::uint64_t>& seeds_in) -> ExperimentPreset {
    const std::vector<std::uint64_t> seeds = seeds_in.empty() ? std::vector<std::uint64_t>{0, 1, 2, 3, 4} : seeds_in;
    if (name == "learning_iron") {
        return expand(name, "iron", learning_agents(), seeds);
    }
    if (name == "learning_treasure") {
        return expand(name, "treasure", learning_agents(), seeds);
    }
    if (name == "milestone_robustness") {
        std::vector<Variation> v;
        for (const auto a : {Variant::Hal, Variant::HRainbowHer}) {
            for (int n = 0; n <= 2; ++n) {
                v.push_back(agent(a, n == 0 ? "" : "-remove" + std::to_string(n), [n](RunConfig& c) { c.remove_milestones = n; }));
            }
        }
        return expand(name, "iron", v, seeds);
    }
    if (name == "stochasticity") {
        std::vector<Variation> v;
        for (const double rate : {0.01, 0.02}) {
            const auto suffix = "-edge" + number_label(rate);
            v.push_back(agent(Variant::Hal, suffix, [rate](RunConfig& c) {
                c.edge_rate = rate;
                c.aff.sigma = 2.0;
            }));
            v.push_back(agent(Variant::HRainbowHer, suffix, [rate](RunConfig& c) { c.edge_rate = rate; }));
        }
        return expand(name, "iron", v, seeds);
    }
    if (name == "task_agnostic") {
        auto agnostic = [](RunConfig& c) { c.task_agnostic = true; };
        return expand(name, "diamond", {agent(Variant::Hal, "", agnostic), agent(Variant::HRainbowHer, "", agnostic)},
                      seeds);
    }
    if (name == "ablations") {
        return expand(name, "iron",
                      {agent(Variant::Hal), agent(Variant::Hal, "-rai", [](RunConfig& c) { c.aff.representation_input = false; }),
                       agent(Variant::Hal, "-rt", [](RunConfig& c) { c.aff.tune_representation = false; }),
                       agent(Variant::Hal, "-cl", [](RunConfig& c) { c.aff.contrastive = false; }),
                       agent(Variant::Hal, "-fnf", [](RunConfig& c) { c.aff.use_fnf = false; })},
                      seeds);
    }
    if (name == "hparam_sweep") {
        std::vector<Variation> v;
        for (const double sigma : {2.0, 5.0, 7.0, 10.0, 15.0}) {
            v.push_back(agent(Variant::Hal, "-sigma" + number_label(sigma), [sigma](RunConfig& c) { c.aff.sigma = sigma; }));
        }
        return expand(name, "treasure", v, seeds);
    }
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

}    // namespace hal::cli
