#include "hal/gridworld/recipes.hpp"

#include <algorithm>

#include "hal/common/error.hpp"
#include "hal/common/keyvalue.hpp"
#include "recipes_embedded.hpp"

namespace hal::grid {

namespace {

auto require_item(const std::string& field, const std::string& name) -> int {
    const int id = item_index(EnvKind::Crafting, name);
    if (id < 0) {
        throw ConfigError(field, "unknown item '" + name + "'");
    }
    return id;
}

auto cell_by_name(const std::string& field, const std::string& name) -> Cell {
    for (int c = 0; c < kCellTypeCount; ++c) {
        if (cell_name(static_cast<Cell>(c)) == name) {
            return static_cast<Cell>(c);
        }
    }
    throw ConfigError(field, "unknown cell '" + name + "'");
}

auto parse_item_count(const std::string& field, const std::string& text) -> std::pair<int, int> {
    const auto parts = split(text, ':');
    if (parts.size() != 2) {
        throw ConfigError(field, "expected item:count, got '" + text + "'");
    }
    const int count = std::stoi(parts[1]);
    if (count <= 0) {
        throw ConfigError(field, "count must be positive");
    }
    return {require_item(field, parts[0]), count};
}

}    // namespace

auto RecipeBook::parse(const std::string& text, const std::string& source) -> RecipeBook {
    const auto kv = KeyValues::parse(text, source);
    RecipeBook book;
    book.text_ = text;
    if (kv.get_string("format", "") != "hal-recipes") {
        throw ConfigError(source + ":format", "not a recipe table");
    }
    book.version_ = static_cast<int>(kv.get_int("version", 0));
    if (book.version_ != 1) {
        throw ConfigError(source + ":version", "unsupported recipe table version " + std::to_string(book.version_));
    }

    book.depth_.fill(-1);
    for (const auto& name : kv.children("milestone")) {
        const int ev = event_index(EnvKind::Crafting, name);
        if (ev < 0) {
            throw ConfigError("milestone." + name, "unknown milestone");
        }
        book.depth_[static_cast<std::size_t>(ev)] = static_cast<int>(kv.get_int("milestone." + name + ".depth", -1));
    }
    for (std::size_t i = 0; i < book.depth_.size(); ++i) {
        if (book.depth_[i] < 0) {
            throw ConfigError("milestone." + std::string(event_names(EnvKind::Crafting)[i]), "missing depth");
        }
    }

    book.tool_tier_.fill(0);
    for (const auto& name : kv.children("tool")) {
        const int item = require_item("tool." + name, name);
        book.tool_tier_[static_cast<std::size_t>(item)] = static_cast<int>(kv.get_int("tool." + name + ".tier", 0));
    }

    for (const auto& name : kv.children("mine")) {
        const auto field = "mine." + name;
        MiningRule rule;
        rule.cell = cell_by_name(field, name);
        const auto yields = kv.get_string(field + ".yields", "none");
        rule.yields = yields == "none" ? -1 : require_item(field + ".yields", yields);
        rule.tier = static_cast<int>(kv.get_int(field + ".tier", 0));
        if (rule.yields >= 0 && event_index(EnvKind::Crafting, yields) < 0) {
            throw ConfigError(field + ".yields", "mined item has no milestone");
        }
        book.mining_.push_back(rule);
    }

    for (const auto& name : kv.children("recipe")) {
        const auto field = "recipe." + name;
        Recipe r;
        r.name = name;
        r.event = event_index(EnvKind::Crafting, name);
        if (r.event < 0) {
            throw ConfigError(field, "recipe has no milestone");
        }
        for (const auto& part : split(kv.get_string(field + ".inputs", ""), ',')) {
            if (!part.empty()) {
                r.inputs.push_back(parse_item_count(field + ".inputs", part));
            }
        }
        if (r.inputs.empty()) {
            throw ConfigError(field + ".inputs", "recipe needs inputs");
        }
        const auto station = kv.get_string(field + ".station", "none");
        r.station = station == "none" ? Cell::Void : cell_by_name(field + ".station", station);
        if (r.station != Cell::Void && !is_station(r.station)) {
            throw ConfigError(field + ".station", "not a station");
        }
        if (const auto places = kv.find(field + ".places")) {
            r.places = cell_by_name(field + ".places", *places);
            if (!is_station(r.places)) {
                throw ConfigError(field + ".places", "only stations can be placed");
            }
        } else {
            const auto [item, count] = parse_item_count(field + ".output", kv.get_string(field + ".output", ""));
            r.output_item = item;
            r.output_count = count;
        }
        book.recipes_.push_back(std::move(r));
    }

    // Every catalogue event must be produced by exactly one rule.
    std::array<int, craft_event::Count> producers{};
    for (const auto& m : book.mining_) {
        if (m.yields >= 0) {
            ++producers[static_cast<std::size_t>(event_index(EnvKind::Crafting, item_names(EnvKind::Crafting)[static_cast<std::size_t>(m.yields)]))];
        }
    }
    for (const auto& r : book.recipes_) {
        ++producers[static_cast<std::size_t>(r.event)];
    }
    for (std::size_t i = 0; i < producers.size(); ++i) {
        if (producers[i] != 1) {
            throw ConfigError(source, "milestone '" + std::string(event_names(EnvKind::Crafting)[i]) + "' must have exactly one producing rule");
        }
    }
    return book;
}

auto RecipeBook::builtin() -> const RecipeBook& {
    return named("standard");
}

auto RecipeBook::named(std::string_view name) -> const RecipeBook& {
    static const RecipeBook standard = parse(std::string(kEmbeddedRecipes), "crafting_recipes.txt");
    static const RecipeBook desk = parse(std::string(kEmbeddedDeskRecipes), "crafting_recipes_desk.txt");
    if (name == "standard") {
        return standard;
    }
    if (name == "desk") {
        return desk;
    }
    throw ConfigError("recipes", "unknown recipe table '" + std::string(name) + "'");
}

auto RecipeBook::names() -> std::vector<std::string> {
    return {"standard", "desk"};
}

auto RecipeBook::mining_rule(Cell cell) const -> const MiningRule* {
    for (const auto& m : mining_) {
        if (m.cell == cell) {
            return &m;
        }
    }
    return nullptr;
}

auto RecipeBook::item_depth(int item) const -> int {
    const int ev = event_index(EnvKind::Crafting, item_names(EnvKind::Crafting)[static_cast<std::size_t>(item)]);
    return ev < 0 ? 0 : depth(ev);
}

auto RecipeBook::held_tier(const std::vector<int>& inventory) const -> int {
    int tier = 0;
    for (std::size_t i = 0; i < inventory.size() && i < tool_tier_.size(); ++i) {
        if (inventory[i] > 0) {
            tier = std::max(tier, tool_tier_[i]);
        }
    }
    return tier;
}

auto event_depths(EnvKind kind) -> std::vector<int> {
    if (kind == EnvKind::Crafting) {
        const auto& book = RecipeBook::builtin();
        std::vector<int> d(craft_event::Count);
        for (int e = 0; e < craft_event::Count; ++e) {
            d[static_cast<std::size_t>(e)] = book.depth(e);
        }
        return d;
    }
    // red_key, red_door, yellow_key, yellow_door, blue_key, blue_door, ball,
    // scale, purple_key, treasure
    return {0, 1, 2, 3, 4, 5, 2, 3, 4, 5};
}

}    // namespace hal::grid
