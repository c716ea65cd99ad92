#include "hal/gridworld/trajectory.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "hal/common/error.hpp"

namespace hal::grid {

using nlohmann::json;

namespace {
constexpr const char* kFormat = "hal-trajectory";
constexpr int kVersion = 1;
}    // namespace

void write_trajectory_header(std::ostream& out, const TrajectoryHeader& header) {
    const json j = {{"format", kFormat}, {"version", kVersion}, {"env", header.env}, {"milestones", header.milestones}, {"seed", header.seed}};
    out << j.dump() << '\n';
}

void write_trajectory_record(std::ostream& out, const TrajectoryRecord& record) {
    json j = {{"step", record.step}, {"action", record.action}, {"action_name", record.action_name},
              {"milestone", nullptr}, {"reward", record.reward}, {"oracle", record.oracle.to_string()}};
    if (!record.milestone.empty()) {
        j["milestone"] = record.milestone;
    }
    out << j.dump() << '\n';
}

void write_trajectory(std::ostream& out, const Trajectory& trajectory) {
    write_trajectory_header(out, trajectory.header);
    for (const auto& r : trajectory.records) {
        write_trajectory_record(out, r);
    }
}

auto read_trajectory(std::istream& in) -> Trajectory {
    Trajectory t;
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("trajectory: empty input");
    }
    try {
        const auto head = json::parse(line);
        if (head.value("format", "") != kFormat || head.value("version", 0) != kVersion) {
            throw Error("trajectory: unsupported format or version");
        }
        t.header.env = head.at("env").get<std::string>();
        t.header.milestones = head.at("milestones").get<std::vector<std::string>>();
        t.header.seed = head.at("seed").get<std::uint64_t>();
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            const auto j = json::parse(line);
            TrajectoryRecord r;
            r.step = j.at("step").get<int>();
            r.action = j.at("action").get<int>();
            r.action_name = j.at("action_name").get<std::string>();
            if (!j.at("milestone").is_null()) {
                r.milestone = j.at("milestone").get<std::string>();
            }
            r.reward = j.at("reward").get<double>();
            r.oracle = BitVector::from_string(j.at("oracle").get<std::string>());
            t.records.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw Error(std::string("trajectory: ") + e.what());
    }
    return t;
}

}    // namespace hal::grid
