// File: config.hpp
// Description: Resolved run configuration, key-value round trip, validation
// and milestone-set ablation

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hal/affordance/model.hpp"
#include "hal/agents/variant.hpp"
#include "hal/common/keyvalue.hpp"
#include "hal/gridworld/world.hpp"

namespace hal::trainer {

struct Hyperparameters {
    double lr = 0.000625;
    double adam_eps = 0.00015;
    double clip_norm = 10.0;
    int batch = 32;
    double gamma = 0.99;
    int target_update = 1000;
    int exp_steps = 400;
    double eps_controller_start = 0.5;
    double eps_controller_end = 0.05;
    double eps_meta_start = 0.2;
    double eps_meta_end = 0.05;
    double eps_affordance_start = 0.8;
    double eps_affordance_end = 0.0;
    double anneal_fraction = 0.5;
    int n_steps = 10;
    int max_option_steps = 50;
    int update_freq = 4;
    int meta_update_freq = 40;
    int affordance_update_freq = 40;
    int representation_update_freq = 40;
    int margin_update_freq = 600;
    double per_alpha = 0.5;
    double per_beta_start = 0.4;
    int controller_capacity = 100000;
    int meta_capacity = 20000;
    int example_capacity = 20000;
    int segment_capacity = 100000;
    bool undiscounted_meta_sum = false;
};

struct NetworkShape {
    std::vector<int> conv = {16, 16};
    std::vector<int> hidden = {128, 128};
    bool dueling = true;
};

struct RunConfig {
    // environment
    std::string task = "iron";                 // iron | diamond | treasure | crafting:<final milestone>
    std::vector<std::string> milestones;       // empty: the task's full set
    int remove_milestones = 0;
    grid::GenConfig gen;
    int max_env_steps = 2000;
    int view_size = 7;
    double step_penalty = 0.01;
    double edge_rate = 0.0;                    // depth-0 disappearance probability per step
    std::string recipes = "standard";          // CRAFTING rule table: standard | desk
    // agent
    agents::Variant agent = agents::Variant::Hal;
    bool task_agnostic = false;
    bool force_all_ones_mask = false;
    Hyperparameters hp;
    NetworkShape net;
    affordance::AffordanceConfig aff;
    // run
    std::int64_t steps = 100000;
    std::uint64_t seed = 0;
    int envs = 4;
    int log_interval = 10000;
    int success_window = 100;
    bool serial = true;
    bool instrument = true;                    // oracle labels for affordance metrics
    std::string preset;

    [[nodiscard]] auto to_keyvalues() const -> KeyValues;
    static auto from_keyvalues(const KeyValues& kv) -> RunConfig;
    // Throws ConfigError naming the offending key.
    void validate() const;
    // Task with the (possibly reduced) milestone set applied.
    [[nodiscard]] auto build_task() const -> grid::TaskSpec;
    [[nodiscard]] auto removed_milestones() const -> std::vector<std::string>;
};

auto full_task(const std::string& name) -> grid::TaskSpec;

// Uniformly removes n non-final milestones; n = 0 is the identity.
auto milestone_ablation(const grid::MilestoneSet& full, int n_removed, std::uint64_t seed) -> grid::MilestoneSet;

// Git-style blob hash (sha1 of "blob <len>\0" + text), hex encoded.
auto git_blob_sha1(const std::string& text) -> std::string;

}    // namespace hal::trainer
