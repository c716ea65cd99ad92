#include "hal/replay/examples.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hal/common/error.hpp"

namespace hal::replay {

void ExampleRing::push(AffordanceExample e) {
    if (capacity_ == 0) {
        return;
    }
    if (items_.size() < capacity_) {
        items_.push_back(std::move(e));
    } else {
        items_[next_] = std::move(e);
        next_ = (next_ + 1) % capacity_;
    }
}

auto ExampleRing::sample(std::size_t n, Rng& rng) const -> std::vector<const AffordanceExample*> {
    if (items_.empty()) {
        throw InsufficientDataError("example buffer is empty");
    }
    std::vector<const AffordanceExample*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(&items_[rng.uniform_index(items_.size())]);
    }
    return out;
}

AffordanceBuffers::AffordanceBuffers(int milestones, std::size_t capacity)
    : pos_(static_cast<std::size_t>(milestones), ExampleRing(capacity)),
      neg_(static_cast<std::size_t>(milestones), ExampleRing(capacity)) {}

void AffordanceBuffers::record_option(std::span<const ObsRef> states, std::span<const std::int8_t> oracle_intended,
                                      std::span<const std::int8_t> oracle_achieved, std::uint64_t segment, int intended,
                                      int achieved) {
    const auto label = [](std::span<const std::int8_t> o, std::size_t i) -> std::int8_t {
        return i < o.size() ? o[i] : std::int8_t{-1};
    };
    if (achieved >= 0) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            add_positive(achieved, {states[i], segment, label(oracle_achieved, i)});
        }
    }
    if (intended >= 0 && intended != achieved) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            add_negative(intended, {states[i], segment, label(oracle_intended, i)});
        }
    }
}

auto AffordanceBuffers::split_population(int g, std::size_t n, std::size_t m, double holdout, Rng& rng) const
    -> PopulationSplit {
    const auto& ring = positives(g);
    std::vector<std::uint64_t> ids;
    {
        std::unordered_set<std::uint64_t> seen;
        for (const auto& e : ring.items()) {
            if (seen.insert(e.segment).second) {
                ids.push_back(e.segment);
            }
        }
    }
    if (ids.size() < 2) {
        throw InsufficientDataError("population split: positives of milestone " + std::to_string(g) +
                                    " come from fewer than two segments");
    }
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = ids.size() - 1; i > 0; --i) {
        std::swap(ids[i], ids[rng.uniform_index(i + 1)]);
    }
    auto held = static_cast<std::size_t>(std::llround(holdout * static_cast<double>(ids.size())));
    held = std::clamp<std::size_t>(held, 1, ids.size() - 1);
    const std::unordered_set<std::uint64_t> reference_ids(ids.begin(), ids.begin() + static_cast<long>(held));

    std::vector<const AffordanceExample*> pop_pool;
    std::vector<const AffordanceExample*> ref_pool;
    for (const auto& e : ring.items()) {
        (reference_ids.count(e.segment) ? ref_pool : pop_pool).push_back(&e);
    }
    PopulationSplit out;
    out.population.reserve(n);
    out.reference.reserve(m);
    for (std::size_t i = 0; i < n; ++i) {
        out.population.push_back(pop_pool[rng.uniform_index(pop_pool.size())]);
    }
    for (std::size_t i = 0; i < m; ++i) {
        out.reference.push_back(ref_pool[rng.uniform_index(ref_pool.size())]);
    }
    return out;
}

}    // namespace hal::replay
