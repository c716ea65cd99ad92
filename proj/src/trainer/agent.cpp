#include "hal/trainer/agent.hpp"

#include <ostream>

#include "hal/common/error.hpp"
#include "hal/gridworld/oracle.hpp"
#include "hal/gridworld/trajectory.hpp"

namespace hal::trainer {

namespace {

enum Stream : std::uint64_t { kControllerInit = 1, kMetaInit = 2, kAffordanceInit = 3 };

auto adam_config(const Hyperparameters& hp) -> approx::AdamConfig {
    approx::AdamConfig a;
    a.lr = hp.lr;
    a.eps = hp.adam_eps;
    a.clip_norm = hp.clip_norm;
    return a;
}

}    // namespace

Agent::Agent(const RunConfig& config, const grid::TaskSpec& task)
    : variant_(config.agent), force_all_ones_(config.force_all_ones_mask), task_(task) {
    const auto enc = agents::ObservationEncoder::for_task(task);
    const int k = task.milestones.size();
    const int actions = task.action_count();
    const Rng master(config.seed);
    const auto adam = adam_config(config.hp);
    const auto& net = config.net;
    controller_ = agents::QLearner(enc, enc.net_config(net.conv, net.hidden, hierarchical() ? k : 1, actions, net.dueling),
                                   adam, master.derive(kControllerInit).seed());
    if (hierarchical()) {
        meta_ = agents::QLearner(enc, enc.net_config(net.conv, net.hidden, 1, k, net.dueling), adam,
                                 master.derive(kMetaInit).seed());
    }
    if (variant_ == agents::Variant::Hal) {
        auto aff = config.aff;
        aff.adam = adam;
        model_ = std::make_unique<affordance::AffordanceModel>(enc, k, aff, master.derive(kAffordanceInit).seed());
    }
}

auto Agent::mask(const grid::World& world, const grid::Observation& obs) const -> grid::AffordanceMask {
    const auto k = static_cast<std::size_t>(task_.milestones.size());
    if (force_all_ones_ || !agents::uses_mask(variant_)) {
        return grid::AffordanceMask(k, true);
    }
    if (variant_ == agents::Variant::HalOracle) {
        return grid::oracle_affordances(world, task_);
    }
    return model_->mask(obs);
}

void Agent::save(approx::CheckpointWriter& out) const {
    out.add("controller/online", controller_.online().serialize());
    out.add("controller/target", controller_.target().serialize());
    out.add("controller/adam", controller_.optimizer().serialize());
    if (hierarchical()) {
        out.add("meta/online", meta_.online().serialize());
        out.add("meta/target", meta_.target().serialize());
        out.add("meta/adam", meta_.optimizer().serialize());
    }
    if (model_) {
        model_->save(out, "affordance/");
    }
}

void Agent::load(const approx::CheckpointReader& in) {
    const auto restore = [&in](agents::QLearner& q, const std::string& prefix) {
        auto online = approx::Network<float>::deserialize(in.get(prefix + "/online"));
        auto target = approx::Network<float>::deserialize(in.get(prefix + "/target"));
        q.online().copy_params_from(online);
        q.target().copy_params_from(target);
        q.optimizer() = approx::Adam<float>::deserialize(in.get(prefix + "/adam"));
    };
    restore(controller_, "controller");
    if (hierarchical()) {
        restore(meta_, "meta");
    }
    if (model_) {
        model_->load(in, "affordance/");
    }
}

void save_checkpoint(const std::string& path, const RunConfig& config, const Agent& agent) {
    approx::CheckpointWriter out;
    out.add("config", config.to_keyvalues().to_text());
    agent.save(out);
    out.save(path);
}

auto load_checkpoint(const std::string& path) -> LoadedRun {
    const auto in = approx::CheckpointReader::load(path);
    LoadedRun run;
    run.config = RunConfig::from_keyvalues(KeyValues::parse(in.get("config"), path + ":config"));
    run.task = run.config.build_task();
    run.agent = std::make_unique<Agent>(run.config, run.task);
    run.agent->load(in);
    return run;
}

AgentPolicy::AgentPolicy(const Agent& agent, const RunConfig& config, bool greedy, std::uint64_t seed)
    : agent_(agent),
      greedy_(greedy),
      eps_c_(greedy ? 0.0 : config.hp.eps_controller_end),
      eps_mc_(greedy ? 0.0 : config.hp.eps_meta_end),
      eps_aff_(greedy ? 0.0 : config.hp.eps_affordance_end),
      rng_(seed) {}

auto AgentPolicy::subtask(const grid::World& world, const grid::Observation& obs) -> int {
    const auto q = agent_.meta().q_values(obs);
    const auto mask = agent_.mask(world, obs);
    if (greedy_) {
        return agents::masked_argmax(q, mask);
    }
    return agents::select_subtask(q, mask, eps_aff_, eps_mc_, rng_).goal;
}

auto AgentPolicy::action(const grid::World&, const grid::Observation& obs, int goal) -> int {
    const auto q = agent_.hierarchical() ? agent_.controller().head_values(obs, goal) : agent_.controller().q_values(obs);
    return agents::select_action(q, eps_c_, rng_);
}

auto evaluate(Policy& policy, const grid::TaskSpec& task, const EvalOptions& options) -> EvalSummary {
    if (options.episodes < 1) {
        throw ConfigError("episodes", "evaluation needs at least one episode");
    }
    const int k = task.milestones.size();
    EvalSummary summary;
    std::int64_t options_total = 0;
    std::int64_t options_ok = 0;
    for (int e = 0; e < options.episodes; ++e) {
        const std::uint64_t seed = mix_seed(options.seed, 0x6576616cULL + static_cast<std::uint64_t>(e));
        auto world = grid::reset(task, seed);
        auto obs = grid::observe(world, task.view_size);
        EpisodeStats stats;
        stats.achieved.assign(static_cast<std::size_t>(k), false);
        const bool dump = options.trajectory != nullptr && e == 0;
        if (dump) {
            grid::write_trajectory_header(*options.trajectory, {grid::to_string(task.kind), task.milestones.symbols(), seed});
        }
        int goal = -1;
        int option_steps = 0;
        while (true) {
            if (policy.hierarchical() && goal < 0) {
                goal = policy.subtask(world, obs);
                option_steps = 0;
            }
            const int a = policy.action(world, obs, goal);
            grid::AffordanceVector oracle;
            if (dump) {
                oracle = grid::oracle_affordances(world, task);
            }
            const auto r = grid::step(world, a, task);
            ++option_steps;
            ++stats.length;
            if (dump) {
                grid::TrajectoryRecord rec;
                rec.step = stats.length - 1;
                rec.action = a;
                rec.action_name = task.action_name(a);
                rec.milestone = r.milestone >= 0 ? task.milestones.symbols()[static_cast<std::size_t>(r.milestone)] : "";
                rec.reward = r.reward;
                rec.oracle = oracle;
                grid::write_trajectory_record(*options.trajectory, rec);
            }
            if (r.milestone >= 0) {
                stats.achieved[static_cast<std::size_t>(r.milestone)] = true;
            }
            if (policy.hierarchical() && (r.milestone >= 0 || option_steps >= options.max_option_steps || r.done)) {
                ++stats.options;
                stats.options_succeeded += r.milestone == goal ? 1 : 0;
                goal = -1;
            }
            obs = r.obs;
            if (r.done) {
                stats.success = r.terminated;
                break;
            }
        }
        options_total += stats.options;
        options_ok += stats.options_succeeded;
        summary.success_rate += stats.success ? 1.0 : 0.0;
        summary.mean_length += stats.length;
        summary.episodes.push_back(std::move(stats));
    }
    summary.success_rate /= options.episodes;
    summary.mean_length /= options.episodes;
    if (options_total > 0) {
        summary.subpolicy_success = static_cast<double>(options_ok) / static_cast<double>(options_total);
    }
    return summary;
}

}    // namespace hal::trainer
