// File: segments.hpp
// Description: Store of closed inter-milestone segments and contrastive
// triplet sampling over them

#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "hal/common/rng.hpp"
#include "hal/replay/transitions.hpp"

namespace hal::replay {

struct Segment {
    std::uint64_t id = 0;
    std::uint64_t episode = 0;
    int milestone = -1;    // event index that closed it, -1 for episode end
    std::vector<ObsRef> states;
};

struct Triplet {
    ObsRef anchor;
    ObsRef positive;
    ObsRef negative;
    std::uint64_t anchor_segment = 0;
    std::uint64_t negative_segment = 0;
    int offset = 0;    // positive index minus anchor index
};

// Integer offset from round(N(0, sigma^2)), nonzero, with anchor + offset
// inside [0, length). Rejection sampling with `tries` attempts, then the last
// draw is clamped to the nearest valid index.
auto sample_offset(Rng& rng, double sigma, int anchor, int length, int tries = 32) -> int;

class SegmentStore {
public:
    explicit SegmentStore(std::size_t capacity_states = 100000) : capacity_(capacity_states) {}

    // Ignores empty segments. Oldest whole segments are evicted past capacity.
    void add(Segment segment);

    // Anchors uniform over stored states; positives within the anchor's
    // segment; negatives uniform over states of other segments.
    [[nodiscard]] auto sample_triplets(std::size_t count, double sigma, Rng& rng) const -> std::vector<Triplet>;

    [[nodiscard]] auto state_count() const -> std::size_t { return states_; }
    [[nodiscard]] auto segment_count() const -> std::size_t { return segments_.size(); }
    [[nodiscard]] auto segments() const -> const std::deque<Segment>& { return segments_; }

private:
    [[nodiscard]] auto locate(std::size_t flat) const -> std::pair<std::size_t, int>;

    std::size_t capacity_;
    std::size_t states_ = 0;
    std::deque<Segment> segments_;
    std::deque<std::size_t> starts_;    // flat index of each segment's first state, relative to base_
    std::size_t base_ = 0;
};

}    // namespace hal::replay
