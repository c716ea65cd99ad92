// File: transitions.hpp
// Description: Controller and meta transitions, n-step folding

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hal/gridworld/world.hpp"

namespace hal::replay {

using ObsRef = std::shared_ptr<const grid::Observation>;

// Folded controller transition. `discount` is gamma^k for a k-step
// bootstrap from next_obs, or 0 when the window ended in a terminal step.
struct Transition {
    ObsRef obs;
    int action = 0;
    double reward = 0.0;
    ObsRef next_obs;
    double discount = 0.0;
    int goal = 0;
    int steps = 1;
};

struct MetaTransition {
    ObsRef obs;
    int goal = 0;
    double reward_sum = 0.0;
    ObsRef next_obs;
    int length = 1;
    bool terminal = false;
};

// One primitive step as seen by a single goal's controller.
struct StepRecord {
    ObsRef obs;
    int action = 0;
    double reward = 0.0;
    ObsRef next_obs;
    bool terminal = false;
};

// Folds window[0 .. min(n, size)) stopping after the first terminal step:
// reward = sum_i gamma^i r_i, bootstrap from the last included next_obs.
auto fold_n_step(std::span<const StepRecord> window, int n, double gamma, int goal) -> Transition;

// One folded transition per step of an option trajectory; windows are
// truncated at the end of the trajectory.
auto fold_trajectory(std::span<const StepRecord> steps, int n, double gamma, int goal) -> std::vector<Transition>;

}    // namespace hal::replay
