// File: rewards.hpp
// Description: Controller reward construction per goal, hindsight relabelling
// and the first-attainment dense reward used by flat baselines

#pragma once

#include <span>
#include <vector>

#include "hal/replay/transitions.hpp"

namespace hal::agents {

// One primitive step inside an option, before any goal is attached.
struct OptionStep {
    replay::ObsRef obs;
    int action = 0;
    replay::ObsRef next_obs;
    int milestone = -1;        // milestone index fired by this step, -1 if none
    bool terminated = false;   // episode ended with g_K
};

// Controller rewards for goal g: b_g - penalty; the step firing g (or ending
// the episode) is terminal for that goal.
auto goal_steps(std::span<const OptionStep> steps, int goal, double step_penalty) -> std::vector<replay::StepRecord>;

// Copies of the option's steps relabelled to the milestone actually
// achieved; empty when nothing or the intended goal was achieved.
auto her_relabel(std::span<const OptionStep> steps, int intended, int achieved, double step_penalty)
    -> std::vector<replay::StepRecord>;

// Adds a unit bonus the first time each milestone fires in an episode.
class DenseReward {
public:
    explicit DenseReward(int milestones = 0) : seen_(static_cast<std::size_t>(milestones), false) {}

    void reset() { std::fill(seen_.begin(), seen_.end(), false); }
    auto reward(int milestone, double step_penalty) -> double;

private:
    std::vector<bool> seen_;
};

}    // namespace hal::agents
