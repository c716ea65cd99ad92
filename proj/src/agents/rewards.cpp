#include "hal/agents/rewards.hpp"

#include "hal/common/error.hpp"

namespace hal::agents {

auto goal_steps(std::span<const OptionStep> steps, int goal, double step_penalty) -> std::vector<replay::StepRecord> {
    std::vector<replay::StepRecord> out;
    out.reserve(steps.size());
    for (const auto& s : steps) {
        const bool hit = s.milestone == goal;
        out.push_back({s.obs, s.action, (hit ? 1.0 : 0.0) - step_penalty, s.next_obs, hit || s.terminated});
    }
    return out;
}

auto her_relabel(std::span<const OptionStep> steps, int intended, int achieved, double step_penalty)
    -> std::vector<replay::StepRecord> {
    if (achieved < 0 || achieved == intended) {
        return {};
    }
    return goal_steps(steps, achieved, step_penalty);
}

auto DenseReward::reward(int milestone, double step_penalty) -> double {
    double r = -step_penalty;
    if (milestone >= 0) {
        if (static_cast<std::size_t>(milestone) >= seen_.size()) {
            throw ShapeError("DenseReward: milestone index out of range");
        }
        if (!seen_[static_cast<std::size_t>(milestone)]) {
            seen_[static_cast<std::size_t>(milestone)] = true;
            r += 1.0;
        }
    }
    return r;
}

}    // namespace hal::agents
