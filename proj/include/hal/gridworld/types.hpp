// File: types.hpp
// Description: Cell, item, action and milestone catalogues for the CRAFTING and
// TREASURE environments

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hal::grid {

enum class EnvKind : std::uint8_t { Crafting, Treasure };

auto to_string(EnvKind kind) -> std::string;
auto parse_env_kind(std::string_view name) -> EnvKind;

// Values are stable; observation codes are derived from them through the
// per-environment channel tables below.
enum class Cell : std::uint8_t {
    Void = 0,
    Empty,
    Wall,
    Tree,
    Stone,
    Coal,
    IronOre,
    Dirt,
    Diamond,
    CraftingBench,
    Furnace,
    DoorRed,
    DoorYellow,
    DoorBlue,
    DoorGrey,
    DoorOpen,
    KeyRed,
    KeyYellow,
    KeyBlue,
    KeyPurple,
    Ball,
    Scale,
    ScaleLoaded,
    Chest,
};

inline constexpr int kCellTypeCount = static_cast<int>(Cell::Chest) + 1;

auto cell_name(Cell cell) -> std::string_view;
auto is_passable(Cell cell) -> bool;
auto is_station(Cell cell) -> bool;

enum class Facing : std::uint8_t { North = 0, East, South, West };

struct Pose {
    int row = 0;
    int col = 0;
    Facing facing = Facing::North;
    auto operator==(const Pose&) const -> bool = default;
};

struct Offset {
    int dr = 0;
    int dc = 0;
};

auto forward_offset(Facing facing) -> Offset;
auto right_offset(Facing facing) -> Offset;
auto turn_left(Facing facing) -> Facing;
auto turn_right(Facing facing) -> Facing;

// Inventory item ids.
namespace craft_item {
inline constexpr int Log = 0;
inline constexpr int Wood = 1;
inline constexpr int Stick = 2;
inline constexpr int WoodPickaxe = 3;
inline constexpr int Stone = 4;
inline constexpr int StonePickaxe = 5;
inline constexpr int Coal = 6;
inline constexpr int IronOre = 7;
inline constexpr int IronIngot = 8;
inline constexpr int IronPickaxe = 9;
inline constexpr int Diamond = 10;
inline constexpr int Count = 11;
}    // namespace craft_item

namespace treasure_item {
inline constexpr int RedKey = 0;
inline constexpr int YellowKey = 1;
inline constexpr int BlueKey = 2;
inline constexpr int PurpleKey = 3;
inline constexpr int Ball = 4;
inline constexpr int Count = 5;
}    // namespace treasure_item

// Catalogue event ids: every interaction that can fire a milestone.
namespace craft_event {
inline constexpr int Log = 0;
inline constexpr int Wood = 1;
inline constexpr int Stick = 2;
inline constexpr int CraftingBench = 3;
inline constexpr int WoodPickaxe = 4;
inline constexpr int Stone = 5;
inline constexpr int Furnace = 6;
inline constexpr int StonePickaxe = 7;
inline constexpr int Coal = 8;
inline constexpr int IronOre = 9;
inline constexpr int IronIngot = 10;
inline constexpr int IronPickaxe = 11;
inline constexpr int Diamond = 12;
inline constexpr int Count = 13;
}    // namespace craft_event

namespace treasure_event {
inline constexpr int RedKey = 0;
inline constexpr int RedDoor = 1;
inline constexpr int YellowKey = 2;
inline constexpr int YellowDoor = 3;
inline constexpr int BlueKey = 4;
inline constexpr int BlueDoor = 5;
inline constexpr int Ball = 6;
inline constexpr int Scale = 7;
inline constexpr int PurpleKey = 8;
inline constexpr int Treasure = 9;
inline constexpr int Count = 10;
}    // namespace treasure_event

namespace action {
inline constexpr int TurnLeft = 0;
inline constexpr int TurnRight = 1;
inline constexpr int Forward = 2;
inline constexpr int Backward = 3;
// CRAFTING: Mine, then one craft action per recipe. TREASURE: Interact.
inline constexpr int Mine = 4;
inline constexpr int Interact = 4;
inline constexpr int FirstCraft = 5;
}    // namespace action

auto item_names(EnvKind kind) -> std::span<const std::string_view>;
auto event_names(EnvKind kind) -> std::span<const std::string_view>;
auto item_index(EnvKind kind, std::string_view name) -> int;     // -1 when unknown
auto event_index(EnvKind kind, std::string_view name) -> int;    // -1 when unknown

// Observation channel tables: cell -> channel, or -1 if the cell type never
// occurs in that environment.
auto channel_count(EnvKind kind) -> int;
auto channel_of(EnvKind kind, Cell cell) -> int;
auto cell_of_channel(EnvKind kind, int channel) -> Cell;

// Fixed-length binary vector used for milestone signals, affordances and masks.
struct BitVector {
    std::vector<std::uint8_t> bits;

    BitVector() = default;
    explicit BitVector(std::size_t n, bool value = false) : bits(n, value ? 1 : 0) {}
    static auto from_string(std::string_view s) -> BitVector;

    [[nodiscard]] auto size() const -> std::size_t { return bits.size(); }
    auto operator[](std::size_t i) const -> bool { return bits[i] != 0; }
    void set(std::size_t i, bool value = true) { bits[i] = value ? 1 : 0; }
    [[nodiscard]] auto count() const -> std::size_t;
    [[nodiscard]] auto any() const -> bool { return count() > 0; }
    [[nodiscard]] auto all() const -> bool { return count() == size(); }
    [[nodiscard]] auto to_string() const -> std::string;
    auto operator==(const BitVector&) const -> bool = default;
};

using MilestoneVector = BitVector;
using AffordanceVector = BitVector;
using AffordanceMask = BitVector;

}    // namespace hal::grid
