// File: variant.hpp
// Description: Agent variants, exploration schedules and subtask/action selection rules

#pragma once

#include <span>
#include <string>
#include <vector>

#include "hal/common/rng.hpp"
#include "hal/gridworld/types.hpp"

namespace hal::agents {

enum class Variant { RainbowSparse, RainbowDense, HRainbow, HRainbowHer, Hal, HalOracle };

auto to_string(Variant v) -> std::string;
auto parse_variant(const std::string& name) -> Variant;
auto all_variants() -> std::span<const Variant>;

[[nodiscard]] inline auto is_hierarchical(Variant v) -> bool { return v != Variant::RainbowSparse && v != Variant::RainbowDense; }
[[nodiscard]] inline auto uses_her(Variant v) -> bool { return v == Variant::HRainbowHer || v == Variant::Hal || v == Variant::HalOracle; }
[[nodiscard]] inline auto uses_mask(Variant v) -> bool { return v == Variant::Hal || v == Variant::HalOracle; }

// Linear from start to end over `horizon` steps, then held.
struct LinearSchedule {
    double start = 0.0;
    double end = 0.0;
    double horizon = 1.0;

    [[nodiscard]] auto at(double step) const -> double {
        if (horizon <= 0.0 || step >= horizon) {
            return end;
        }
        return start + (end - start) * (step / horizon);
    }
};

struct ExplorationSchedule {
    LinearSchedule controller{0.5, 0.05, 1.0};
    LinearSchedule meta{0.2, 0.05, 1.0};
    LinearSchedule affordance{0.8, 0.0, 1.0};

    void set_horizon(double steps) {
        controller.horizon = steps;
        meta.horizon = steps;
        affordance.horizon = steps;
    }
};

// Lowest index among maxima.
auto argmax(std::span<const float> values) -> int;

// Uniform with probability eps, otherwise greedy. One uniform draw is
// consumed per call, plus one index draw on the random branch.
auto select_action(std::span<const float> q, double eps, Rng& rng) -> int;

enum class SelectBranch { Afforded, Random, Greedy };

struct SubtaskChoice {
    int goal = 0;
    SelectBranch branch = SelectBranch::Greedy;
};

// epsilon^2-greedy: u < eps_aff -> uniform within mask; u < eps_aff + eps_mc
// -> uniform over all goals; else masked argmax. All-zero masks act as all-ones.
auto select_subtask(std::span<const float> q, const grid::AffordanceMask& mask, double eps_aff, double eps_mc, Rng& rng)
    -> SubtaskChoice;

auto masked_argmax(std::span<const float> q, const grid::AffordanceMask& mask) -> int;

}    // namespace hal::agents
