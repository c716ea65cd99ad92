// File: trajectory.hpp
// Description: Line-delimited JSON trajectory dump used by golden tests and
// `hal eval --dump-trajectory`

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hal/gridworld/types.hpp"

namespace hal::grid {

struct TrajectoryHeader {
    std::string env;
    std::vector<std::string> milestones;
    std::uint64_t seed = 0;
    auto operator==(const TrajectoryHeader&) const -> bool = default;
};

struct TrajectoryRecord {
    int step = 0;
    int action = 0;
    std::string action_name;
    std::string milestone;     // empty when none fired
    double reward = 0.0;
    AffordanceVector oracle;   // oracle affordances of the pre-step world
    auto operator==(const TrajectoryRecord&) const -> bool = default;
};

struct Trajectory {
    TrajectoryHeader header;
    std::vector<TrajectoryRecord> records;
    auto operator==(const Trajectory&) const -> bool = default;
};

void write_trajectory_header(std::ostream& out, const TrajectoryHeader& header);
void write_trajectory_record(std::ostream& out, const TrajectoryRecord& record);
void write_trajectory(std::ostream& out, const Trajectory& trajectory);
auto read_trajectory(std::istream& in) -> Trajectory;

}    // namespace hal::grid
