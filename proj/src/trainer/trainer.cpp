#include "hal/trainer/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "hal/agents/rewards.hpp"
#include "hal/common/error.hpp"
#include "hal/gridworld/oracle.hpp"
#include "hal/gridworld/recipes.hpp"

namespace hal::trainer {

namespace {

enum Stream : std::uint64_t { kAct = 4, kReplay = 5, kAffordance = 6, kEnvBase = 100 };

}    // namespace

auto option_lifecycle(int option_steps, int max_option_steps, int fired_milestone, bool episode_done)
    -> std::optional<OptionEnd> {
    if (fired_milestone >= 0) {
        return OptionEnd::Milestone;
    }
    if (episode_done) {
        return OptionEnd::EpisodeEnd;
    }
    if (option_steps >= max_option_steps) {
        return OptionEnd::Timeout;
    }
    return std::nullopt;
}

struct Trainer::Slot {
    int index = 0;
    Rng env_rng;
    grid::World world;
    replay::ObsRef obs;
    std::uint64_t episode = 0;
    EpisodeStats stats;
    agents::DenseReward dense;
    std::deque<replay::StepRecord> pending;
    // current option
    int goal = -1;
    agents::SelectBranch branch = agents::SelectBranch::Greedy;
    grid::AffordanceMask mask;
    std::optional<grid::AffordanceVector> selection_oracle;
    replay::ObsRef option_start;
    std::vector<agents::OptionStep> steps;
    std::vector<double> rewards;
    std::vector<grid::AffordanceVector> state_oracle;
    double option_return = 0.0;
    double discount = 1.0;
    // current inter-milestone segment
    replay::Segment segment;
};

Trainer::Trainer(RunConfig config, TrainerHooks hooks)
    : config_(std::move(config)), hooks_(std::move(hooks)) {
    config_.validate();
    task_ = config_.build_task();
    agent_ = std::make_unique<Agent>(config_, task_);
    schedule_.controller = {config_.hp.eps_controller_start, config_.hp.eps_controller_end, 1.0};
    schedule_.meta = {config_.hp.eps_meta_start, config_.hp.eps_meta_end, 1.0};
    schedule_.affordance = {config_.hp.eps_affordance_start, config_.hp.eps_affordance_end, 1.0};
    schedule_.set_horizon(config_.hp.anneal_fraction * static_cast<double>(config_.steps));
    const Rng master(config_.seed);
    act_rng_ = master.derive(kAct);
    replay_rng_ = master.derive(kReplay);
    aff_rng_ = master.derive(kAffordance);
    const replay::PriorityConfig per{config_.hp.per_alpha, 1e-6};
    d_c_ = replay::PrioritizedReplay<replay::Transition>(static_cast<std::size_t>(config_.hp.controller_capacity), per);
    d_mc_ = replay::PrioritizedReplay<replay::MetaTransition>(static_cast<std::size_t>(config_.hp.meta_capacity), per);
    const int k = task_.milestones.size();
    d_aff_ = replay::AffordanceBuffers(k, static_cast<std::size_t>(config_.hp.example_capacity));
    segments_ = replay::SegmentStore(static_cast<std::size_t>(config_.hp.segment_capacity));
    window_ = EpisodeWindow(static_cast<std::size_t>(config_.success_window), k);
    slots_.resize(static_cast<std::size_t>(config_.envs));
    for (int i = 0; i < config_.envs; ++i) {
        auto& s = slots_[static_cast<std::size_t>(i)];
        s.index = i;
        s.env_rng = master.derive(kEnvBase + static_cast<std::uint64_t>(i));
        s.dense = agents::DenseReward(k);
        start_episode(s);
    }
}

Trainer::~Trainer() = default;

auto Trainer::learns_affordances() const -> bool { return agent_->has_affordance_model(); }

auto Trainer::eps_controller() const -> double { return schedule_.controller.at(static_cast<double>(t_)); }
auto Trainer::eps_meta() const -> double { return schedule_.meta.at(static_cast<double>(t_)); }
auto Trainer::eps_affordance() const -> double { return schedule_.affordance.at(static_cast<double>(t_)); }

void Trainer::start_episode(Slot& s) {
    s.world = grid::reset(task_, s.env_rng.next_u64());
    s.obs = std::make_shared<const grid::Observation>(grid::observe(s.world, task_.view_size));
    s.episode = next_episode_++;
    s.stats = EpisodeStats{};
    s.stats.achieved.assign(static_cast<std::size_t>(task_.milestones.size()), false);
    s.dense.reset();
    s.pending.clear();
    s.goal = -1;
    s.segment = replay::Segment{};
    s.segment.id = next_segment_++;
    s.segment.episode = s.episode;
}

void Trainer::choose_option(Slot& s) {
    const auto& obs = *s.obs;
    const int k = task_.milestones.size();
    s.mask = agent_->mask(s.world, obs);
    s.selection_oracle.reset();
    const bool masking = agents::uses_mask(config_.agent);
    if (masking && config_.instrument) {
        const bool mask_is_oracle = config_.agent == agents::Variant::HalOracle && !config_.force_all_ones_mask;
        s.selection_oracle = mask_is_oracle ? s.mask : grid::oracle_affordances(s.world, task_);
    }
    std::vector<float> q;
    double eps_aff = eps_affordance();
    double eps_mc = eps_meta();
    if (config_.task_agnostic) {
        q.assign(static_cast<std::size_t>(k), 0.0f);
        eps_aff = 1.0 - eps_mc;
    } else {
        q = agent_->meta().q_values(obs);
    }
    if (warming_up()) {
        eps_aff = 0.0;
        eps_mc = 1.0;
    }
    const auto choice = agents::select_subtask(q, s.mask, eps_aff, eps_mc, act_rng_);
    if (s.selection_oracle) {
        mask_acc_.add(compute_mask_metrics(s.mask, *s.selection_oracle,
                                           config_.task_agnostic ? std::span<const float>() : std::span<const float>(q)));
    }
    s.goal = choice.goal;
    s.branch = choice.branch;
    s.option_start = s.obs;
    s.steps.clear();
    s.rewards.clear();
    s.state_oracle.clear();
    s.option_return = 0.0;
    s.discount = 1.0;
}

void Trainer::push_flat(Slot& s, replay::StepRecord rec, bool flush) {
    const int n = config_.hp.n_steps;
    s.pending.push_back(std::move(rec));
    const auto emit = [&] {
        const std::vector<replay::StepRecord> window(s.pending.begin(), s.pending.end());
        d_c_.push(replay::fold_n_step(window, n, config_.hp.gamma, 0));
        s.pending.pop_front();
    };
    if (static_cast<int>(s.pending.size()) >= n) {
        emit();
    }
    if (flush) {
        while (!s.pending.empty()) {
            emit();
        }
    }
}

void Trainer::finish_option(Slot& s, const grid::StepResult& r, const replay::ObsRef& next, OptionEnd reason) {
    const auto& hp = config_.hp;
    const double penalty = task_.reward.step_penalty;
    const int achieved = r.milestone;
    const auto records = agents::goal_steps(s.steps, s.goal, penalty);
    for (auto& tr : replay::fold_trajectory(records, hp.n_steps, hp.gamma, s.goal)) {
        d_c_.push(std::move(tr));
    }
    if (agents::uses_her(config_.agent)) {
        const auto relabelled = agents::her_relabel(s.steps, s.goal, achieved, penalty);
        if (!relabelled.empty()) {
            for (auto& tr : replay::fold_trajectory(relabelled, hp.n_steps, hp.gamma, achieved)) {
                d_c_.push(std::move(tr));
            }
        }
    }
    replay::MetaTransition meta{s.option_start, s.goal, s.option_return, next, static_cast<int>(s.steps.size()),
                                r.terminated};
    if (!config_.task_agnostic) {
        d_mc_.push(meta);
    }
    if (learns_affordances()) {
        std::vector<replay::ObsRef> states;
        states.reserve(s.steps.size());
        for (const auto& st : s.steps) {
            states.push_back(st.obs);
        }
        std::vector<std::int8_t> oracle_goal(states.size(), -1);
        std::vector<std::int8_t> oracle_achieved(states.size(), -1);
        if (s.state_oracle.size() == states.size()) {
            for (std::size_t i = 0; i < states.size(); ++i) {
                oracle_goal[i] = s.state_oracle[i][static_cast<std::size_t>(s.goal)] ? 1 : 0;
                if (achieved >= 0) {
                    oracle_achieved[i] = s.state_oracle[i][static_cast<std::size_t>(achieved)] ? 1 : 0;
                }
            }
        }
        d_aff_.record_option(states, oracle_goal, oracle_achieved, s.segment.id, s.goal, achieved);
    }
    ++s.stats.options;
    s.stats.options_succeeded += achieved == s.goal ? 1 : 0;
    if (hooks_.on_option) {
        OptionRecord rec;
        rec.env = s.index;
        rec.episode = s.episode;
        rec.goal = s.goal;
        rec.achieved = achieved;
        rec.reason = reason;
        rec.branch = s.branch;
        rec.mask = s.mask;
        rec.oracle = s.selection_oracle;
        rec.rewards = s.rewards;
        rec.meta = std::move(meta);
        hooks_.on_option(rec);
    }
    s.goal = -1;
}

void Trainer::env_step(Slot& s) {
    const bool hierarchical = agent_->hierarchical();
    if (hierarchical && s.goal < 0) {
        choose_option(s);
    }
    const auto q = hierarchical ? agent_->controller().head_values(*s.obs, s.goal) : agent_->controller().q_values(*s.obs);
    const int a = agents::select_action(q, warming_up() ? 1.0 : eps_controller(), act_rng_);
    if (hierarchical && learns_affordances() && config_.instrument) {
        s.state_oracle.push_back(grid::oracle_affordances(s.world, task_));
    }
    const auto r = grid::step(s.world, a, task_);
    const auto next = std::make_shared<const grid::Observation>(r.obs);
    ++t_;
    ++s.stats.length;
    if (r.milestone >= 0) {
        s.stats.achieved[static_cast<std::size_t>(r.milestone)] = true;
    }
    s.segment.states.push_back(s.obs);

    if (hierarchical) {
        s.steps.push_back({s.obs, a, next, r.milestone, r.terminated});
        s.rewards.push_back(r.reward);
        s.option_return += s.discount * r.reward;
        s.discount *= config_.hp.undiscounted_meta_sum ? 1.0 : config_.hp.gamma;
        if (const auto end = option_lifecycle(static_cast<int>(s.steps.size()), config_.hp.max_option_steps, r.milestone,
                                              r.done)) {
            finish_option(s, r, next, *end);
        }
    } else {
        const double reward = config_.agent == agents::Variant::RainbowDense
                                  ? s.dense.reward(r.milestone, task_.reward.step_penalty)
                                  : r.reward;
        push_flat(s, {s.obs, a, reward, next, r.terminated}, r.done);
    }

    if (r.milestone >= 0 || r.done) {
        s.segment.milestone = r.milestone;
        if (learns_affordances() && config_.aff.contrastive) {
            segments_.add(std::move(s.segment));
        }
        s.segment = replay::Segment{};
        s.segment.id = next_segment_++;
        s.segment.episode = s.episode;
    }
    if (r.done) {
        s.stats.success = r.terminated;
        if (hooks_.on_episode) {
            hooks_.on_episode(s.stats);
        }
        window_.push(s.stats);
        episodes_.push_back(std::move(s.stats));
        start_episode(s);
    } else {
        s.obs = next;
    }
}

void Trainer::run_updates() {
    const auto& hp = config_.hp;
    if (t_ <= hp.exp_steps) {
        return;
    }
    const auto tick = [this](int freq) { return t_ % freq == 0; };
    const double beta = hp.per_beta_start + (1.0 - hp.per_beta_start) *
                                                std::min(1.0, static_cast<double>(t_) / std::max<double>(1.0, config_.steps));
    const auto batch = static_cast<std::size_t>(hp.batch);
    if (tick(hp.update_freq)) {
        ++counts_.controller_ticks;
        if (d_c_.size() > 0) {
            const auto b = d_c_.sample(batch, beta, replay_rng_);
            const auto res = agent_->controller().controller_update(b.items, b.weights);
            d_c_.update(b.slots, res.td_errors);
            controller_loss_.add(res.loss);
            ++counts_.controller_updates;
        }
    }
    if (agent_->hierarchical() && !config_.task_agnostic && tick(hp.meta_update_freq)) {
        ++counts_.meta_ticks;
        if (d_mc_.size() > 0) {
            const auto b = d_mc_.sample(batch, beta, replay_rng_);
            const auto res = agent_->meta().meta_update(b.items, b.weights, hp.gamma);
            d_mc_.update(b.slots, res.td_errors);
            meta_loss_.add(res.loss);
            ++counts_.meta_updates;
        }
    }
    if (learns_affordances()) {
        auto& model = agent_->affordance_model();
        if (config_.aff.use_fnf && tick(hp.margin_update_freq)) {
            ++counts_.margin_ticks;
            model.update_margins(d_aff_, aff_rng_);
        }
        if (tick(hp.affordance_update_freq)) {
            ++counts_.classifier_ticks;
            const double loss = model.update_classifier(d_aff_, aff_rng_);
            if (std::isfinite(loss)) {
                ++counts_.classifier_updates;
                classifier_loss_.add(loss);
            }
        }
        if (tick(hp.representation_update_freq)) {
            ++counts_.representation_ticks;
            const double loss = model.update_representation(segments_, aff_rng_);
            if (std::isfinite(loss)) {
                ++counts_.representation_updates;
                contrastive_loss_.add(loss);
            }
        }
    }
    if (tick(hp.target_update)) {
        ++counts_.target_syncs;
        agent_->controller().sync_target();
        if (agent_->hierarchical()) {
            agent_->meta().sync_target();
        }
    }
}

void Trainer::emit_row(std::ostream* metrics) {
    MetricRow row;
    row.step = t_;
    row.episodes = static_cast<std::int64_t>(episodes_.size());
    row.success_rate = window_.success_rate();
    row.episode_length = window_.mean_length();
    row.subpolicy_success = window_.subpolicy_success();
    row.milestone_rates = window_.milestone_rates();
    row.mask = mask_acc_.mean();
    row.mask_impact = config_.task_agnostic ? std::nullopt : mask_acc_.impact_rate();
    if (learns_affordances()) {
        auto& model = agent_->affordance_model();
        row.filter = filter_metrics(model.filter_stats(), &model);
        model.reset_filter_stats();
    }
    row.controller_loss = controller_loss_.mean();
    row.meta_loss = meta_loss_.mean();
    row.contrastive_loss = contrastive_loss_.mean();
    row.classifier_loss = classifier_loss_.mean();
    row.eps_controller = eps_controller();
    row.eps_meta = eps_meta();
    row.eps_affordance = eps_affordance();
    mask_acc_.reset();
    controller_loss_ = {};
    meta_loss_ = {};
    contrastive_loss_ = {};
    classifier_loss_ = {};
    if (metrics != nullptr) {
        write_metric_row(*metrics, row);
        metrics->flush();
    }
    rows_.push_back(std::move(row));
}

void Trainer::run(std::ostream* metrics, const std::string& diagnostic_path) {
    if (metrics != nullptr) {
        write_metric_header(*metrics, task_.milestones.symbols());
    }
    const auto envs = static_cast<std::int64_t>(slots_.size());
    while (t_ < config_.steps) {
        env_step(slots_[static_cast<std::size_t>(t_ % envs)]);
        try {
            run_updates();
        } catch (const NonFiniteError& e) {
            if (!diagnostic_path.empty()) {
                save_checkpoint(diagnostic_path, config_, *agent_);
            }
            throw NonFiniteError("step " + std::to_string(t_) + ": " + e.what() +
                                 (diagnostic_path.empty() ? "" : " (snapshot: " + diagnostic_path + ")"));
        }
        if (t_ % config_.log_interval == 0 || t_ == config_.steps) {
            emit_row(metrics);
        }
    }
}

auto TaskAgnosticReport::rate(const std::string& milestone) const -> double {
    for (std::size_t i = 0; i < milestones.size(); ++i) {
        if (milestones[i] == milestone) {
            return rates[i];
        }
    }
    throw ConfigError("milestone", "'" + milestone + "' is not in the report");
}

auto task_agnostic_run(RunConfig config, int window) -> TaskAgnosticReport {
    config.task_agnostic = true;
    Trainer trainer(config);
    trainer.run();
    const auto& task = trainer.task();
    const auto& eps = trainer.episodes();
    const auto k = static_cast<std::size_t>(task.milestones.size());
    const std::size_t first = eps.size() > static_cast<std::size_t>(window) ? eps.size() - static_cast<std::size_t>(window) : 0;
    std::vector<double> rates(k, 0.0);
    for (std::size_t e = first; e < eps.size(); ++e) {
        for (std::size_t g = 0; g < k; ++g) {
            rates[g] += eps[e].achieved[g] ? 1.0 : 0.0;
        }
    }
    const auto n = static_cast<double>(eps.size() - first);
    const auto depths = grid::event_depths(task.kind);
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    const auto depth_of = [&](std::size_t g) {
        return depths[static_cast<std::size_t>(task.milestones.event_of(static_cast<int>(g)))];
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return depth_of(a) < depth_of(b); });
    TaskAgnosticReport report;
    report.episodes = static_cast<std::int64_t>(eps.size() - first);
    for (const auto g : order) {
        report.milestones.push_back(task.milestones.symbols()[g]);
        report.depths.push_back(depth_of(g));
        report.rates.push_back(n > 0 ? rates[g] / n : 0.0);
    }
    return report;
}

auto manifest_json(const RunConfig& config) -> std::string {
    nlohmann::ordered_json j;
    j["format"] = "hal-manifest";
    j["version"] = 1;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    const auto kv = config.to_keyvalues();
    for (const auto& [key, value] : kv.entries()) {
        cfg[key] = value;
    }
    j["config"] = cfg;
    const auto task = config.build_task();
    j["milestones"] = task.milestones.symbols();
    j["removed_milestones"] = config.removed_milestones();
    const auto& recipes = task.recipe_book();
    j["recipes"] = task.recipes;
    j["recipes_version"] = recipes.version();
    j["recipes_sha1"] = git_blob_sha1(recipes.text());
    j["metrics"] = "metrics.csv";
    j["checkpoint"] = "ckpt/final.ckpt";
    return j.dump(2) + "\n";
}

auto run_training(const RunConfig& config, const std::filesystem::path& out_dir, TrainerHooks hooks) -> TrainingArtifacts {
    TrainingArtifacts art{out_dir / "metrics.csv", out_dir / "manifest.json", out_dir / "ckpt" / "final.ckpt"};
    std::filesystem::create_directories(out_dir / "ckpt");
    {
        std::ofstream manifest(art.manifest);
        manifest << manifest_json(config);
        if (!manifest) {
            throw Error("cannot write " + art.manifest.string());
        }
    }
    std::ofstream csv(art.metrics);
    if (!csv) {
        throw Error("cannot write " + art.metrics.string());
    }
    Trainer trainer(config, std::move(hooks));
    trainer.run(&csv, (out_dir / "ckpt" / "diagnostic.ckpt").string());
    save_checkpoint(art.checkpoint.string(), trainer.config(), trainer.agent());
    return art;
}

}    // namespace hal::trainer
