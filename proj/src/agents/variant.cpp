#include "hal/agents/variant.hpp"

#include <array>
#include <limits>

#include "hal/common/error.hpp"

namespace hal::agents {

namespace {

constexpr std::array kVariants = {Variant::RainbowSparse, Variant::RainbowDense, Variant::HRainbow,
                                  Variant::HRainbowHer,   Variant::Hal,          Variant::HalOracle};
constexpr std::array<const char*, 6> kNames = {"rainbow_sparse", "rainbow_dense", "h_rainbow",
                                               "h_rainbow_her",  "hal",           "hal_oracle"};

auto effective(const grid::AffordanceMask& mask, std::size_t n) -> grid::AffordanceMask {
    if (mask.size() != n) {
        throw ShapeError("select_subtask: mask length differs from goal count");
    }
    return mask.any() ? mask : grid::AffordanceMask(n, true);
}

}    // namespace

auto to_string(Variant v) -> std::string {
    return kNames.at(static_cast<std::size_t>(v));
}

auto parse_variant(const std::string& name) -> Variant {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (name == kNames[i]) {
            return kVariants[i];
        }
    }
    throw ConfigError("agent", "unknown agent variant '" + name + "'");
}

auto all_variants() -> std::span<const Variant> {
    return kVariants;
}

auto argmax(std::span<const float> values) -> int {
    if (values.empty()) {
        throw ShapeError("argmax: empty input");
    }
    int best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[static_cast<std::size_t>(best)]) {
            best = static_cast<int>(i);
        }
    }
    return best;
}

auto masked_argmax(std::span<const float> q, const grid::AffordanceMask& mask) -> int {
    const auto m = effective(mask, q.size());
    int best = -1;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (m[i] && (best < 0 || q[i] > q[static_cast<std::size_t>(best)])) {
            best = static_cast<int>(i);
        }
    }
    return best;
}

auto select_action(std::span<const float> q, double eps, Rng& rng) -> int {
    if (q.empty()) {
        throw ShapeError("select_action: no actions");
    }
    if (rng.uniform() < eps) {
        return static_cast<int>(rng.uniform_index(q.size()));
    }
    return argmax(q);
}

auto select_subtask(std::span<const float> q, const grid::AffordanceMask& mask, double eps_aff, double eps_mc, Rng& rng)
    -> SubtaskChoice {
    const auto m = effective(mask, q.size());
    const double u = rng.uniform();
    if (u < eps_aff) {
        std::vector<int> allowed;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i]) {
                allowed.push_back(static_cast<int>(i));
            }
        }
        return {allowed[rng.uniform_index(allowed.size())], SelectBranch::Afforded};
    }
    if (u < eps_aff + eps_mc) {
        return {static_cast<int>(rng.uniform_index(q.size())), SelectBranch::Random};
    }
    return {masked_argmax(q, m), SelectBranch::Greedy};
}

}    // namespace hal::agents
