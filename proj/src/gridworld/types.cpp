#include "hal/gridworld/types.hpp"

#include <algorithm>

#include "hal/common/error.hpp"

namespace hal::grid {

namespace {

constexpr std::array<std::string_view, kCellTypeCount> kCellNames = {
    "void",      "empty",       "wall",       "tree",        "stone",     "coal",       "iron_ore", "dirt",
    "diamond",   "crafting_bench", "furnace", "door_red",    "door_yellow", "door_blue", "door_grey", "door_open",
    "key_red",   "key_yellow",  "key_blue",   "key_purple",  "ball",      "scale",      "scale_loaded", "chest",
};

constexpr std::array<std::string_view, craft_item::Count> kCraftItems = {
    "log", "wood", "stick", "wood_pickaxe", "stone", "stone_pickaxe", "coal", "iron_ore", "iron_ingot", "iron_pickaxe", "diamond",
};

constexpr std::array<std::string_view, treasure_item::Count> kTreasureItems = {
    "red_key", "yellow_key", "blue_key", "purple_key", "ball",
};

constexpr std::array<std::string_view, craft_event::Count> kCraftEvents = {
    "log",       "wood",          "stick", "crafting_bench", "wood_pickaxe", "stone",        "furnace",
    "stone_pickaxe", "coal",      "iron_ore", "iron_ingot",  "iron_pickaxe", "diamond",
};

constexpr std::array<std::string_view, treasure_event::Count> kTreasureEvents = {
    "red_key", "red_door", "yellow_key", "yellow_door", "blue_key", "blue_door", "ball", "scale", "purple_key", "treasure",
};

constexpr std::array<Cell, 11> kCraftChannels = {
    Cell::Void, Cell::Empty, Cell::Wall, Cell::Tree, Cell::Stone, Cell::Coal,
    Cell::IronOre, Cell::Dirt, Cell::Diamond, Cell::CraftingBench, Cell::Furnace,
};

constexpr std::array<Cell, 16> kTreasureChannels = {
    Cell::Void,     Cell::Empty,    Cell::Wall,      Cell::DoorRed,   Cell::DoorYellow, Cell::DoorBlue,
    Cell::DoorGrey, Cell::DoorOpen, Cell::KeyRed,    Cell::KeyYellow, Cell::KeyBlue,    Cell::KeyPurple,
    Cell::Ball,     Cell::Scale,    Cell::ScaleLoaded, Cell::Chest,
};

template <std::size_t N>
auto find_name(const std::array<std::string_view, N>& names, std::string_view name) -> int {
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

}    // namespace

auto to_string(EnvKind kind) -> std::string {
    return kind == EnvKind::Crafting ? "crafting" : "treasure";
}

auto parse_env_kind(std::string_view name) -> EnvKind {
    if (name == "crafting") {
        return EnvKind::Crafting;
    }
    if (name == "treasure") {
        return EnvKind::Treasure;
    }
    throw ConfigError("env.kind", "unknown environment '" + std::string(name) + "'");
}

auto cell_name(Cell cell) -> std::string_view {
    return kCellNames.at(static_cast<std::size_t>(cell));
}

auto is_passable(Cell cell) -> bool {
    switch (cell) {
        case Cell::Empty:
        case Cell::CraftingBench:
        case Cell::Furnace:
        case Cell::DoorOpen:
        case Cell::KeyRed:
        case Cell::KeyYellow:
        case Cell::KeyBlue:
        case Cell::KeyPurple:
        case Cell::Ball:
            return true;
        default:
            return false;
    }
}

auto is_station(Cell cell) -> bool {
    return cell == Cell::CraftingBench || cell == Cell::Furnace;
}

auto forward_offset(Facing facing) -> Offset {
    switch (facing) {
        case Facing::North:
            return {-1, 0};
        case Facing::East:
            return {0, 1};
        case Facing::South:
            return {1, 0};
        case Facing::West:
            return {0, -1};
    }
    return {};
}

auto right_offset(Facing facing) -> Offset {
    return forward_offset(turn_right(facing));
}

auto turn_left(Facing facing) -> Facing {
    return static_cast<Facing>((static_cast<int>(facing) + 3) % 4);
}

auto turn_right(Facing facing) -> Facing {
    return static_cast<Facing>((static_cast<int>(facing) + 1) % 4);
}

auto item_names(EnvKind kind) -> std::span<const std::string_view> {
    if (kind == EnvKind::Crafting) {
        return kCraftItems;
    }
    return kTreasureItems;
}

auto event_names(EnvKind kind) -> std::span<const std::string_view> {
    if (kind == EnvKind::Crafting) {
        return kCraftEvents;
    }
    return kTreasureEvents;
}

auto item_index(EnvKind kind, std::string_view name) -> int {
    return kind == EnvKind::Crafting ? find_name(kCraftItems, name) : find_name(kTreasureItems, name);
}

auto event_index(EnvKind kind, std::string_view name) -> int {
    return kind == EnvKind::Crafting ? find_name(kCraftEvents, name) : find_name(kTreasureEvents, name);
}

auto channel_count(EnvKind kind) -> int {
    return kind == EnvKind::Crafting ? static_cast<int>(kCraftChannels.size()) : static_cast<int>(kTreasureChannels.size());
}

auto channel_of(EnvKind kind, Cell cell) -> int {
    const auto find_cell = [cell](const auto& table) {
        const auto it = std::find(table.begin(), table.end(), cell);
        return it == table.end() ? -1 : static_cast<int>(it - table.begin());
    };
    return kind == EnvKind::Crafting ? find_cell(kCraftChannels) : find_cell(kTreasureChannels);
}

auto cell_of_channel(EnvKind kind, int channel) -> Cell {
    if (kind == EnvKind::Crafting) {
        return kCraftChannels.at(static_cast<std::size_t>(channel));
    }
    return kTreasureChannels.at(static_cast<std::size_t>(channel));
}

auto BitVector::from_string(std::string_view s) -> BitVector {
    BitVector v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') {
            throw Error("BitVector: expected '0' or '1'");
        }
        v.bits[i] = s[i] == '1' ? 1 : 0;
    }
    return v;
}

auto BitVector::count() const -> std::size_t {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

auto BitVector::to_string() const -> std::string {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0) {
            s[i] = '1';
        }
    }
    return s;
}

}    // namespace hal::grid
