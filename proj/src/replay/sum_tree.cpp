#include "hal/replay/sum_tree.hpp"

#include <cmath>

#include "hal/common/error.hpp"

namespace hal::replay {

SumTree::SumTree(std::size_t capacity) : capacity_(capacity) {
    leaf_base_ = 1;
    while (leaf_base_ < capacity) {
        leaf_base_ <<= 1;
    }
    nodes_.assign(2 * leaf_base_, 0.0);
}

void SumTree::set(std::size_t slot, double priority) {
    if (slot >= capacity_) {
        throw Error("SumTree: slot out of range");
    }
    if (!(priority >= 0.0) || !std::isfinite(priority)) {
        throw Error("SumTree: priority must be finite and non-negative");
    }
    std::size_t i = leaf_base_ + slot;
    nodes_[i] = priority;
    for (i >>= 1; i >= 1; i >>= 1) {
        nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
    }
}

auto SumTree::find(double mass) const -> std::size_t {
    std::size_t i = 1;
    while (i < leaf_base_) {
        const double left = nodes_[2 * i];
        if (mass < left || nodes_[2 * i + 1] <= 0.0) {
            i = 2 * i;
        } else {
            mass -= left;
            i = 2 * i + 1;
        }
    }
    std::size_t slot = i - leaf_base_;
    // rounding can land on an empty trailing leaf
    while (slot > 0 && nodes_[leaf_base_ + slot] <= 0.0) {
        --slot;
    }
    return slot;
}

}    // namespace hal::replay
