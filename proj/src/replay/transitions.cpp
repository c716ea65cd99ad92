#include "hal/replay/transitions.hpp"

#include "hal/common/error.hpp"

namespace hal::replay {

auto fold_n_step(std::span<const StepRecord> window, int n, double gamma, int goal) -> Transition {
    if (window.empty() || n < 1) {
        throw Error("fold_n_step: need a non-empty window and n >= 1");
    }
    Transition t;
    t.obs = window[0].obs;
    t.action = window[0].action;
    t.goal = goal;
    double scale = 1.0;
    std::size_t k = 0;
    const std::size_t limit = std::min(window.size(), static_cast<std::size_t>(n));
    bool terminal = false;
    while (k < limit) {
        t.reward += scale * window[k].reward;
        scale *= gamma;
        terminal = window[k].terminal;
        ++k;
        if (terminal) {
            break;
        }
    }
    t.next_obs = window[k - 1].next_obs;
    t.discount = terminal ? 0.0 : scale;
    t.steps = static_cast<int>(k);
    return t;
}

auto fold_trajectory(std::span<const StepRecord> steps, int n, double gamma, int goal) -> std::vector<Transition> {
    std::vector<Transition> out;
    out.reserve(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out.push_back(fold_n_step(steps.subspan(i), n, gamma, goal));
    }
    return out;
}

}    // namespace hal::replay
