// File: examples.hpp
// Description: Per-milestone positive and candidate-negative affordance
// example buffers, option-boundary routing, and segment-disjoint
// population/reference sampling

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hal/common/rng.hpp"
#include "hal/replay/transitions.hpp"

namespace hal::replay {

struct AffordanceExample {
    ObsRef obs;
    std::uint64_t segment = 0;
    std::int8_t oracle = -1;    // ground-truth affordance when instrumented
};

class ExampleRing {
public:
    explicit ExampleRing(std::size_t capacity = 20000) : capacity_(capacity) { items_.reserve(std::min<std::size_t>(capacity, 1024)); }

    void push(AffordanceExample e);
    [[nodiscard]] auto size() const -> std::size_t { return items_.size(); }
    [[nodiscard]] auto empty() const -> bool { return items_.empty(); }
    [[nodiscard]] auto operator[](std::size_t i) const -> const AffordanceExample& { return items_[i]; }
    [[nodiscard]] auto items() const -> const std::vector<AffordanceExample>& { return items_; }
    [[nodiscard]] auto sample(std::size_t n, Rng& rng) const -> std::vector<const AffordanceExample*>;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<AffordanceExample> items_;
};

struct PopulationSplit {
    std::vector<const AffordanceExample*> population;
    std::vector<const AffordanceExample*> reference;
};

class AffordanceBuffers {
public:
    AffordanceBuffers() = default;
    AffordanceBuffers(int milestones, std::size_t capacity);

    // Routing at an option boundary. `states` are the option's pre-action
    // states. achieved == -1 means timeout or episode end without a milestone.
    // A fired milestone receives the states as positives; an intended but
    // unachieved goal receives them as candidate negatives.
    void record_option(std::span<const ObsRef> states, std::span<const std::int8_t> oracle_intended,
                       std::span<const std::int8_t> oracle_achieved, std::uint64_t segment, int intended, int achieved);

    void add_positive(int g, AffordanceExample e) { pos_.at(static_cast<std::size_t>(g)).push(std::move(e)); }
    void add_negative(int g, AffordanceExample e) { neg_.at(static_cast<std::size_t>(g)).push(std::move(e)); }

    [[nodiscard]] auto positives(int g) const -> const ExampleRing& { return pos_.at(static_cast<std::size_t>(g)); }
    [[nodiscard]] auto negatives(int g) const -> const ExampleRing& { return neg_.at(static_cast<std::size_t>(g)); }
    [[nodiscard]] auto milestones() const -> int { return static_cast<int>(pos_.size()); }

    // Distinct positive segments are split: a random `holdout` fraction (at
    // least one segment) supplies up to m reference points, the rest supply n
    // population points; both drawn uniformly with replacement.
    [[nodiscard]] auto split_population(int g, std::size_t n, std::size_t m, double holdout, Rng& rng) const
        -> PopulationSplit;

private:
    std::vector<ExampleRing> pos_;
    std::vector<ExampleRing> neg_;
};

}    // namespace hal::replay
