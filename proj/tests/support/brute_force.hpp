// File: brute_force.hpp
// Description: Test-only affordance oracle by exhaustive search over primitive
// action sequences, plus miniature world generators for cross-checking

#pragma once

#include <cstdint>

#include "hal/gridworld/world.hpp"

namespace hal::testing {

// Breadth-first search over full world states (cells, pose, inventory). A
// milestone is afforded iff some action sequence fires it with no earlier
// milestone of the set. `max_states` bounds the search; exceeding it throws.
auto brute_force_affordances(const grid::World& world, const grid::TaskSpec& task, std::size_t max_states = 4'000'000)
    -> grid::AffordanceVector;

// Random small worlds (outer size rows x cols <= 7x7) with random contents,
// pose and inventory.
auto miniature_crafting(std::uint64_t seed, int rows, int cols) -> grid::World;
auto miniature_treasure(std::uint64_t seed, int rows, int cols) -> grid::World;

// Random milestone subset of the catalogue (always contains `final_symbol`).
auto random_milestones(grid::EnvKind kind, std::uint64_t seed, const std::string& final_symbol) -> grid::MilestoneSet;

}    // namespace hal::testing
