// File: world.hpp
// Description: Simulator state, task description and the step/observe API for
// both gridworld environments

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hal/common/rng.hpp"
#include "hal/gridworld/recipes.hpp"
#include "hal/gridworld/types.hpp"

namespace hal {
class KeyValues;
}

namespace hal::grid {

struct GenConfig {
    // CRAFTING (outer size, border walls included)
    int rows = 14;
    int cols = 14;
    double tree_density = 0.25;
    double upper_dirt_density = 0.05;
    double stone_weight = 0.55;
    double coal_weight = 0.12;
    double iron_weight = 0.10;
    double dirt_weight = 0.23;
    int min_trees = 4;
    int min_stone = 14;
    int min_coal = 2;
    int min_iron = 2;
    // TREASURE: interior side of each of the five rooms
    int room_size = 4;
    int retry_budget = 100;

    static auto from(const KeyValues& kv, const std::string& prefix) -> GenConfig;
};

struct World {
    EnvKind kind = EnvKind::Crafting;
    int rows = 0;
    int cols = 0;
    std::vector<Cell> cells;
    Pose agent;
    std::vector<int> inventory;
    Rng rng;
    int step_count = 0;
    std::uint64_t seed = 0;    // seed that produced this layout (after retries)

    [[nodiscard]] auto in_bounds(int r, int c) const -> bool { return r >= 0 && r < rows && c >= 0 && c < cols; }
    [[nodiscard]] auto at(int r, int c) const -> Cell { return in_bounds(r, c) ? cells[index(r, c)] : Cell::Void; }
    void put(int r, int c, Cell cell) { cells[index(r, c)] = cell; }
    [[nodiscard]] auto index(int r, int c) const -> std::size_t { return static_cast<std::size_t>(r * cols + c); }
    [[nodiscard]] auto count(Cell cell) const -> int;
    [[nodiscard]] auto carried() const -> int;    // TREASURE: carried item or -1

    auto operator==(const World&) const -> bool = default;
};

class MilestoneSet {
public:
    MilestoneSet() = default;
    // Throws ConfigError("milestones", ...) when g_K is absent, a name is
    // unknown or duplicated.
    MilestoneSet(EnvKind kind, std::vector<std::string> symbols, const std::string& final_symbol);

    static auto full(EnvKind kind, const std::string& final_symbol) -> MilestoneSet;

    [[nodiscard]] auto size() const -> int { return static_cast<int>(symbols_.size()); }
    [[nodiscard]] auto symbols() const -> const std::vector<std::string>& { return symbols_; }
    [[nodiscard]] auto final_index() const -> int { return final_index_; }
    [[nodiscard]] auto event_of(int milestone) const -> int { return events_.at(static_cast<std::size_t>(milestone)); }
    // Milestone index of a catalogue event, or -1 when the event is not a milestone.
    [[nodiscard]] auto index_of_event(int event) const -> int { return lookup_.at(static_cast<std::size_t>(event)); }
    [[nodiscard]] auto index_of(const std::string& symbol) const -> int;
    [[nodiscard]] auto kind() const -> EnvKind { return kind_; }

    auto operator==(const MilestoneSet&) const -> bool = default;

private:
    EnvKind kind_ = EnvKind::Crafting;
    std::vector<std::string> symbols_;
    std::vector<int> events_;
    std::vector<int> lookup_;
    int final_index_ = 0;
};

struct StochasticityConfig {
    std::vector<double> disappear_prob;    // per item; empty = none

    // Base rate for depth-0 items, halved per hierarchy level.
    static auto depth_scaled(EnvKind kind, double rate) -> StochasticityConfig;
    [[nodiscard]] auto active() const -> bool;
};

struct RewardConfig {
    double success = 1.0;
    double step_penalty = 0.01;
};

struct TaskSpec {
    EnvKind kind = EnvKind::Crafting;
    MilestoneSet milestones;
    GenConfig gen;
    RewardConfig reward;
    StochasticityConfig stochasticity;
    int max_env_steps = 2000;
    int station_radius = 1;    // Chebyshev distance for "near a station"
    int view_size = 7;
    std::string recipes = "standard";    // CRAFTING rule table name

    static auto crafting(const std::string& final_symbol) -> TaskSpec;
    static auto treasure() -> TaskSpec;
    [[nodiscard]] auto action_count() const -> int;
    [[nodiscard]] auto recipe_book() const -> const RecipeBook& { return RecipeBook::named(recipes); }
    [[nodiscard]] auto action_name(int a) const -> std::string;
};

struct Observation {
    std::vector<std::uint8_t> view;    // view_size x view_size channel codes, row-major, agent facing up
    std::vector<std::int16_t> inventory;
    auto operator==(const Observation&) const -> bool = default;
};

struct StepResult {
    Observation obs;
    double reward = 0.0;
    MilestoneVector milestones;
    bool done = false;
    bool terminated = false;    // g_K reached
    int event = -1;             // catalogue event fired this step, -1 if none
    int milestone = -1;         // index into the milestone set, -1 if none
};

auto generate(EnvKind kind, std::uint64_t seed, const GenConfig& gen) -> World;
auto reset(const TaskSpec& task, std::uint64_t seed) -> World;

auto step(World& world, int action, const TaskSpec& task) -> StepResult;
auto observe(const World& world, int view_size = 7) -> Observation;
void apply_edge_stochasticity(World& world, const StochasticityConfig& config);

// Resolves the action's effect on the grid and inventory; returns the fired
// catalogue event or -1. No time, reward or stochasticity bookkeeping.
auto resolve_action(World& world, int action, const TaskSpec& task) -> int;

// Multi-line ASCII rendering for debugging and test failure messages.
auto render(const World& world) -> std::string;

}    // namespace hal::grid
