// File: trainer.hpp
// Description: Training loop over round-robin parallel environments: option
// lifecycle, buffer routing, update schedules, exploration annealing and
// metric logging

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hal/replay/examples.hpp"
#include "hal/replay/prioritized.hpp"
#include "hal/replay/segments.hpp"
#include "hal/trainer/agent.hpp"
#include "hal/trainer/config.hpp"
#include "hal/trainer/metrics.hpp"

namespace hal::trainer {

enum class OptionEnd { Milestone, Timeout, EpisodeEnd };

// Why an option should stop after a step, if at all.
auto option_lifecycle(int option_steps, int max_option_steps, int fired_milestone, bool episode_done)
    -> std::optional<OptionEnd>;

struct OptionRecord {
    int env = 0;
    std::uint64_t episode = 0;
    int goal = -1;
    int achieved = -1;
    OptionEnd reason = OptionEnd::Timeout;
    agents::SelectBranch branch = agents::SelectBranch::Greedy;
    grid::AffordanceMask mask;
    std::optional<grid::AffordanceVector> oracle;    // at selection time, when instrumented
    std::vector<double> rewards;                     // extrinsic reward of each contained step
    replay::MetaTransition meta;
};

struct TrainerHooks {
    std::function<void(const OptionRecord&)> on_option;
    std::function<void(const EpisodeStats&)> on_episode;
};

// Schedule ticks (every freq steps past warmup) and the updates that had
// enough data to run.
struct UpdateCounts {
    std::int64_t controller_ticks = 0;
    std::int64_t meta_ticks = 0;
    std::int64_t classifier_ticks = 0;
    std::int64_t representation_ticks = 0;
    std::int64_t margin_ticks = 0;
    std::int64_t target_syncs = 0;
    std::int64_t controller_updates = 0;
    std::int64_t meta_updates = 0;
    std::int64_t classifier_updates = 0;
    std::int64_t representation_updates = 0;
};

class Trainer {
public:
    explicit Trainer(RunConfig config, TrainerHooks hooks = {});
    ~Trainer();
    Trainer(const Trainer&) = delete;
    auto operator=(const Trainer&) -> Trainer& = delete;

    // Runs the whole budget, streaming metric rows (header first) to `metrics`.
    // A non-finite loss writes `diagnostic_path` (when set) and rethrows.
    void run(std::ostream* metrics = nullptr, const std::string& diagnostic_path = "");

    [[nodiscard]] auto config() const -> const RunConfig& { return config_; }
    [[nodiscard]] auto task() const -> const grid::TaskSpec& { return task_; }
    [[nodiscard]] auto agent() -> Agent& { return *agent_; }
    [[nodiscard]] auto agent() const -> const Agent& { return *agent_; }
    [[nodiscard]] auto steps_done() const -> std::int64_t { return t_; }
    [[nodiscard]] auto counts() const -> const UpdateCounts& { return counts_; }
    [[nodiscard]] auto rows() const -> const std::vector<MetricRow>& { return rows_; }
    [[nodiscard]] auto episodes() const -> const std::vector<EpisodeStats>& { return episodes_; }
    [[nodiscard]] auto controller_buffer() const -> const replay::PrioritizedReplay<replay::Transition>& { return d_c_; }
    [[nodiscard]] auto meta_buffer() const -> const replay::PrioritizedReplay<replay::MetaTransition>& { return d_mc_; }
    [[nodiscard]] auto affordance_buffers() const -> const replay::AffordanceBuffers& { return d_aff_; }
    [[nodiscard]] auto segments() const -> const replay::SegmentStore& { return segments_; }

private:
    struct Slot;

    void start_episode(Slot& s);
    void choose_option(Slot& s);
    void env_step(Slot& s);
    void finish_option(Slot& s, const grid::StepResult& r, const replay::ObsRef& next, OptionEnd reason);
    void push_flat(Slot& s, replay::StepRecord rec, bool flush);
    void run_updates();
    void emit_row(std::ostream* metrics);
    [[nodiscard]] auto eps_controller() const -> double;
    [[nodiscard]] auto eps_meta() const -> double;
    [[nodiscard]] auto eps_affordance() const -> double;
    [[nodiscard]] auto learns_affordances() const -> bool;
    [[nodiscard]] auto warming_up() const -> bool { return t_ < config_.hp.exp_steps; }

    RunConfig config_;
    TrainerHooks hooks_;
    grid::TaskSpec task_;
    std::unique_ptr<Agent> agent_;
    agents::ExplorationSchedule schedule_;
    Rng act_rng_;
    Rng replay_rng_;
    Rng aff_rng_;
    std::vector<Slot> slots_;
    replay::PrioritizedReplay<replay::Transition> d_c_;
    replay::PrioritizedReplay<replay::MetaTransition> d_mc_;
    replay::AffordanceBuffers d_aff_;
    replay::SegmentStore segments_;
    std::int64_t t_ = 0;
    std::uint64_t next_episode_ = 0;
    std::uint64_t next_segment_ = 1;
    UpdateCounts counts_;
    std::vector<EpisodeStats> episodes_;
    EpisodeWindow window_;
    MaskAccumulator mask_acc_;
    struct LossMean {
        double sum = 0.0;
        std::int64_t n = 0;
        void add(double v) {
            if (std::isfinite(v)) {
                sum += v;
                ++n;
            }
        }
        [[nodiscard]] auto mean() const -> std::optional<double> { return n > 0 ? std::optional<double>(sum / n) : std::nullopt; }
    };
    LossMean controller_loss_;
    LossMean meta_loss_;
    LossMean contrastive_loss_;
    LossMean classifier_loss_;
    std::vector<MetricRow> rows_;
};

// Per-milestone episode achievement rates, ordered by hierarchy depth.
struct TaskAgnosticReport {
    std::vector<std::string> milestones;
    std::vector<int> depths;
    std::vector<double> rates;
    std::int64_t episodes = 0;

    [[nodiscard]] auto rate(const std::string& milestone) const -> double;
};

// Rates over the last `window` completed episodes of a task-agnostic run.
auto task_agnostic_run(RunConfig config, int window = 100) -> TaskAgnosticReport;

struct TrainingArtifacts {
    std::filesystem::path metrics;
    std::filesystem::path manifest;
    std::filesystem::path checkpoint;
};

auto manifest_json(const RunConfig& config) -> std::string;

// Writes <out>/{metrics.csv, manifest.json, ckpt/final.ckpt}.
auto run_training(const RunConfig& config, const std::filesystem::path& out_dir, TrainerHooks hooks = {})
    -> TrainingArtifacts;

}    // namespace hal::trainer
