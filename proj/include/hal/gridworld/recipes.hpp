// File: recipes.hpp
// Description: CRAFTING rule table (mining, tools, recipes, hierarchy depths)
// loaded from the versioned key-value recipe file

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hal/gridworld/types.hpp"

namespace hal::grid {

struct MiningRule {
    Cell cell = Cell::Void;
    int yields = -1;    // item id, -1 = nothing collected
    int tier = 0;       // minimum tool tier
};

struct Recipe {
    std::string name;
    int event = -1;
    std::vector<std::pair<int, int>> inputs;    // (item, count)
    Cell station = Cell::Void;                  // Void = no station needed
    int output_item = -1;
    int output_count = 0;
    Cell places = Cell::Void;                   // non-Void: recipe places this station
};

class RecipeBook {
public:
    static auto parse(const std::string& text, const std::string& source = "<recipes>") -> RecipeBook;
    // The standard table compiled in from data/crafting_recipes.txt.
    static auto builtin() -> const RecipeBook&;
    // Compiled-in tables: "standard", and "desk" (data/crafting_recipes_desk.txt,
    // reduced quantities for short training budgets). Throws ConfigError("recipes").
    static auto named(std::string_view name) -> const RecipeBook&;
    static auto names() -> std::vector<std::string>;

    [[nodiscard]] auto recipes() const -> const std::vector<Recipe>& { return recipes_; }
    [[nodiscard]] auto mining_rule(Cell cell) const -> const MiningRule*;
    [[nodiscard]] auto tool_tier(int item) const -> int { return tool_tier_.at(static_cast<std::size_t>(item)); }
    [[nodiscard]] auto depth(int event) const -> int { return depth_.at(static_cast<std::size_t>(event)); }
    [[nodiscard]] auto item_depth(int item) const -> int;
    [[nodiscard]] auto version() const -> int { return version_; }
    [[nodiscard]] auto text() const -> const std::string& { return text_; }

    // Highest tier among held tools.
    [[nodiscard]] auto held_tier(const std::vector<int>& inventory) const -> int;

private:
    std::vector<Recipe> recipes_;
    std::vector<MiningRule> mining_;
    std::array<int, craft_item::Count> tool_tier_{};
    std::array<int, craft_event::Count> depth_{};
    int version_ = 0;
    std::string text_;
};

// Hierarchy depth of every catalogue event of an environment (TREASURE uses a
// fixed table).
auto event_depths(EnvKind kind) -> std::vector<int>;

}    // namespace hal::grid
