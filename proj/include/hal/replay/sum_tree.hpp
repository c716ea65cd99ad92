// File: sum_tree.hpp
// Description: Array-backed sum tree for proportional sampling over a fixed
// number of slots

#pragma once

#include <cstddef>
#include <vector>

namespace hal::replay {

class SumTree {
public:
    explicit SumTree(std::size_t capacity = 0);

    void set(std::size_t slot, double priority);
    [[nodiscard]] auto get(std::size_t slot) const -> double { return nodes_[leaf_base_ + slot]; }
    [[nodiscard]] auto total() const -> double { return nodes_.empty() ? 0.0 : nodes_[1]; }
    [[nodiscard]] auto capacity() const -> std::size_t { return capacity_; }
    // Slot whose cumulative range contains `mass`, for mass in [0, total()).
    [[nodiscard]] auto find(double mass) const -> std::size_t;

private:
    std::size_t capacity_ = 0;
    std::size_t leaf_base_ = 0;
    std::vector<double> nodes_;    // 1-based heap layout
};

}    // namespace hal::replay
