// File: scripted.hpp
// Description: Hand-written planners used as test fixtures: walk-through
// scripts and an optimal option-level controller with ground-truth access

#pragma once

#include "hal/gridworld/world.hpp"

namespace hal::testing {

// Next primitive action that makes progress toward firing catalogue `event`
// without firing any other milestone of the task first. Returns -1 when no
// such route is known.
auto scripted_action_for(const grid::World& world, const grid::TaskSpec& task, int event) -> int;

// Next milestone event of a fixed hand-written plan toward the task's final
// milestone (full milestone sets only).
auto scripted_next_event(const grid::World& world, const grid::TaskSpec& task) -> int;

// Full-task solver: scripted_action_for(scripted_next_event(...)).
auto scripted_action(const grid::World& world, const grid::TaskSpec& task) -> int;

}    // namespace hal::testing
