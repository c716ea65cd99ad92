// File: encoding.hpp
// Description: One-hot HWC encoding of egocentric channel-code views plus a
// scaled inventory tail, written straight into a network input column

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>

#include "hal/approx/network.hpp"
#include "hal/common/error.hpp"

namespace hal::approx {

inline constexpr double kInventoryScale = 8.0;

template <typename S>
void encode_view(std::span<const std::uint8_t> view, std::span<const std::int16_t> inventory, int channels,
                 S* column, int input_size) {
    const auto cells = static_cast<int>(view.size());
    if (cells * channels + static_cast<int>(inventory.size()) != input_size) {
        throw ShapeError("encode_view: observation does not match network input");
    }
    std::fill(column, column + input_size, S(0));
    for (int i = 0; i < cells; ++i) {
        const int code = view[static_cast<std::size_t>(i)];
        if (code >= channels) {
            throw ShapeError("encode_view: channel code out of range");
        }
        column[i * channels + code] = S(1);
    }
    for (std::size_t k = 0; k < inventory.size(); ++k) {
        column[cells * channels + static_cast<int>(k)] = static_cast<S>(inventory[k] / kInventoryScale);
    }
}

}    // namespace hal::approx
