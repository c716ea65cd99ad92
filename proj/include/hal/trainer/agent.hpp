// File: agent.hpp
// Description: Learner bundle for one run (controller, meta-controller,
// affordance model), checkpoints, and greedy/stochastic evaluation

#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hal/affordance/model.hpp"
#include "hal/agents/qlearner.hpp"
#include "hal/trainer/config.hpp"
#include "hal/trainer/metrics.hpp"

namespace hal::trainer {

class Agent {
public:
    Agent(const RunConfig& config, const grid::TaskSpec& task);

    [[nodiscard]] auto hierarchical() const -> bool { return agents::is_hierarchical(variant_); }
    [[nodiscard]] auto variant() const -> agents::Variant { return variant_; }
    [[nodiscard]] auto controller() -> agents::QLearner& { return controller_; }
    [[nodiscard]] auto controller() const -> const agents::QLearner& { return controller_; }
    [[nodiscard]] auto meta() -> agents::QLearner& { return meta_; }
    [[nodiscard]] auto meta() const -> const agents::QLearner& { return meta_; }
    [[nodiscard]] auto has_affordance_model() const -> bool { return model_ != nullptr; }
    [[nodiscard]] auto affordance_model() -> affordance::AffordanceModel& { return *model_; }
    [[nodiscard]] auto affordance_model() const -> const affordance::AffordanceModel* { return model_.get(); }

    // Mask used for subtask selection: oracle for hal_oracle, learned for
    // hal, all ones otherwise (or when forced).
    [[nodiscard]] auto mask(const grid::World& world, const grid::Observation& obs) const -> grid::AffordanceMask;

    void save(approx::CheckpointWriter& out) const;
    void load(const approx::CheckpointReader& in);

private:
    agents::Variant variant_;
    bool force_all_ones_ = false;
    grid::TaskSpec task_;
    agents::QLearner controller_;
    agents::QLearner meta_;
    std::unique_ptr<affordance::AffordanceModel> model_;
};

void save_checkpoint(const std::string& path, const RunConfig& config, const Agent& agent);

struct LoadedRun {
    RunConfig config;
    grid::TaskSpec task;
    std::unique_ptr<Agent> agent;
};

// Throws ChecksumError on corruption.
auto load_checkpoint(const std::string& path) -> LoadedRun;

// Option-level policy used by evaluation.
class Policy {
public:
    virtual ~Policy() = default;
    [[nodiscard]] virtual auto hierarchical() const -> bool = 0;
    virtual auto subtask(const grid::World& world, const grid::Observation& obs) -> int = 0;
    virtual auto action(const grid::World& world, const grid::Observation& obs, int goal) -> int = 0;
};

// Trained agent as a policy. Greedy: epsilon 0 with masking intact;
// otherwise the end-of-anneal exploration rates.
class AgentPolicy : public Policy {
public:
    AgentPolicy(const Agent& agent, const RunConfig& config, bool greedy, std::uint64_t seed);
    [[nodiscard]] auto hierarchical() const -> bool override { return agent_.hierarchical(); }
    auto subtask(const grid::World& world, const grid::Observation& obs) -> int override;
    auto action(const grid::World& world, const grid::Observation& obs, int goal) -> int override;

private:
    const Agent& agent_;
    bool greedy_;
    double eps_c_;
    double eps_mc_;
    double eps_aff_;
    Rng rng_;
};

struct EvalOptions {
    int episodes = 10;
    std::uint64_t seed = 0;
    int max_option_steps = 50;
    std::ostream* trajectory = nullptr;    // first episode, gridworld trajectory format
};

struct EvalSummary {
    std::vector<EpisodeStats> episodes;
    double success_rate = 0.0;
    double mean_length = 0.0;
    std::optional<double> subpolicy_success;
};

// Throws ConfigError for n_episodes < 1.
auto evaluate(Policy& policy, const grid::TaskSpec& task, const EvalOptions& options) -> EvalSummary;

}    // namespace hal::trainer
