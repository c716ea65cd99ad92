// File: oracle.hpp
// Description: Ground-truth hierarchical affordances: which milestones can be
// completed from a world state before any other milestone of the set fires

#pragma once

#include "hal/gridworld/world.hpp"

namespace hal::grid {

// Exact search over macro states (grid, inventory, region reachable by the
// agent). Movement inside the connected region is free; clearing neighbours
// that fire no milestone is applied eagerly, crafting and placements that fire
// no milestone are branched on. Stochastic item loss is ignored.
auto oracle_affordances(const World& world, const TaskSpec& task) -> AffordanceVector;

}    // namespace hal::grid
