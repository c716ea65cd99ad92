// File: prioritized.hpp
// Description: Ring buffer with proportional prioritized sampling and
// importance-sampling weights

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hal/common/error.hpp"
#include "hal/common/rng.hpp"
#include "hal/replay/sum_tree.hpp"

namespace hal::replay {

struct PriorityConfig {
    double alpha = 0.5;          // priority exponent
    double min_priority = 1e-6;  // added to |td error|
};

template <typename T>
struct SampledBatch {
    std::vector<std::size_t> slots;
    std::vector<double> weights;    // normalised to max 1 within the batch
    std::vector<const T*> items;
};

template <typename T>
class PrioritizedReplay {
public:
    PrioritizedReplay() = default;
    PrioritizedReplay(std::size_t capacity, PriorityConfig config)
        : config_(config), tree_(capacity), items_(capacity) {
        if (capacity == 0) {
            throw ConfigError("replay.capacity", "must be positive");
        }
    }

    // New items enter with the current maximum priority.
    void push(T item) {
        const std::size_t slot = next_;
        items_[slot] = std::move(item);
        tree_.set(slot, max_priority_);
        next_ = (next_ + 1) % items_.size();
        size_ = std::min(size_ + 1, items_.size());
        ++pushed_;
    }

    // Independent proportional draws; IS weights (N P_i)^-beta / max.
    auto sample(std::size_t batch, double beta, Rng& rng) const -> SampledBatch<T> {
        if (size_ == 0) {
            throw InsufficientDataError("replay: cannot sample from an empty buffer");
        }
        SampledBatch<T> out;
        out.slots.reserve(batch);
        out.weights.reserve(batch);
        out.items.reserve(batch);
        const double total = tree_.total();
        double max_w = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t slot = tree_.find(rng.uniform() * total);
            const double p = tree_.get(slot) / total;
            const double w = std::pow(static_cast<double>(size_) * p, -beta);
            max_w = std::max(max_w, w);
            out.slots.push_back(slot);
            out.weights.push_back(w);
            out.items.push_back(&items_[slot]);
        }
        for (auto& w : out.weights) {
            w /= max_w;
        }
        return out;
    }

    // priority = (|td| + min_priority)^alpha
    void update(const std::vector<std::size_t>& slots, const std::vector<double>& td_errors) {
        if (slots.size() != td_errors.size()) {
            throw ShapeError("replay: slot/error count mismatch");
        }
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (slots[i] >= size_) {
                throw Error("replay: stale slot");
            }
            if (!std::isfinite(td_errors[i])) {
                throw NonFiniteError("replay: non-finite TD error");
            }
            const double p = std::pow(std::abs(td_errors[i]) + config_.min_priority, config_.alpha);
            tree_.set(slots[i], p);
            max_priority_ = std::max(max_priority_, p);
        }
    }

    void set_priority(std::size_t slot, double priority) {
        tree_.set(slot, priority);
        max_priority_ = std::max(max_priority_, priority);
    }

    [[nodiscard]] auto size() const -> std::size_t { return size_; }
    [[nodiscard]] auto capacity() const -> std::size_t { return items_.size(); }
    [[nodiscard]] auto pushed() const -> std::uint64_t { return pushed_; }
    [[nodiscard]] auto empty() const -> bool { return size_ == 0; }
    [[nodiscard]] auto priority(std::size_t slot) const -> double { return tree_.get(slot); }
    [[nodiscard]] auto at(std::size_t slot) const -> const T& { return items_.at(slot); }
    // Oldest-first iteration order index -> slot.
    [[nodiscard]] auto slot_of(std::size_t age_index) const -> std::size_t {
        return size_ < items_.size() ? age_index : (next_ + age_index) % items_.size();
    }

private:
    PriorityConfig config_;
    SumTree tree_;
    std::vector<T> items_;
    std::size_t next_ = 0;
    std::size_t size_ = 0;
    std::uint64_t pushed_ = 0;
    double max_priority_ = 1.0;
};

}    // namespace hal::replay
