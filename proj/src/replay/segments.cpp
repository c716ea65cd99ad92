#include "hal/replay/segments.hpp"

#include <algorithm>
#include <cmath>

#include "hal/common/error.hpp"

namespace hal::replay {

auto sample_offset(Rng& rng, double sigma, int anchor, int length, int tries) -> int {
    if (length < 2 || anchor < 0 || anchor >= length) {
        throw InsufficientDataError("sample_offset: segment needs at least two states");
    }
    long draw = 0;
    for (int t = 0; t < tries; ++t) {
        draw = std::lround(sigma * rng.normal());
        if (draw != 0 && anchor + draw >= 0 && anchor + draw < length) {
            return static_cast<int>(draw);
        }
    }
    if (draw == 0) {
        draw = rng.bernoulli(0.5) ? 1 : -1;
    }
    long target = std::clamp<long>(anchor + draw, 0, length - 1);
    if (target == anchor) {
        target = anchor + (draw > 0 ? -1 : 1);
    }
    return static_cast<int>(target - anchor);
}

void SegmentStore::add(Segment segment) {
    if (segment.states.empty()) {
        return;
    }
    starts_.push_back(base_ + states_);
    states_ += segment.states.size();
    segments_.push_back(std::move(segment));
    while (states_ > capacity_ && segments_.size() > 1) {
        states_ -= segments_.front().states.size();
        base_ += segments_.front().states.size();
        segments_.pop_front();
        starts_.pop_front();
    }
}

auto SegmentStore::locate(std::size_t flat) const -> std::pair<std::size_t, int> {
    const std::size_t global = base_ + flat;
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), global);
    const auto seg = static_cast<std::size_t>(it - starts_.begin()) - 1;
    return {seg, static_cast<int>(global - starts_[seg])};
}

auto SegmentStore::sample_triplets(std::size_t count, double sigma, Rng& rng) const -> std::vector<Triplet> {
    const bool usable = std::any_of(segments_.begin(), segments_.end(), [](const Segment& s) { return s.states.size() >= 2; });
    if (segments_.size() < 2 || !usable) {
        throw InsufficientDataError("sample_triplets: need two segments and one with at least two states");
    }
    std::vector<Triplet> out;
    out.reserve(count);
    while (out.size() < count) {
        const auto [seg, idx] = locate(rng.uniform_index(states_));
        const Segment& s = segments_[seg];
        if (s.states.size() < 2) {
            continue;
        }
        Triplet t;
        t.anchor = s.states[static_cast<std::size_t>(idx)];
        t.anchor_segment = s.id;
        t.offset = sample_offset(rng, sigma, idx, static_cast<int>(s.states.size()));
        t.positive = s.states[static_cast<std::size_t>(idx + t.offset)];
        // states outside the anchor segment are [0, start) and [end, total)
        const std::size_t start = starts_[seg] - base_;
        const std::size_t others = states_ - s.states.size();
        std::size_t pick = rng.uniform_index(others);
        if (pick >= start) {
            pick += s.states.size();
        }
        const auto [nseg, nidx] = locate(pick);
        t.negative = segments_[nseg].states[static_cast<std::size_t>(nidx)];
        t.negative_segment = segments_[nseg].id;
        out.push_back(std::move(t));
    }
    return out;
}

}    // namespace hal::replay
