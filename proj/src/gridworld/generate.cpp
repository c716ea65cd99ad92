#include <algorithm>
#include <array>
#include <numeric>

#include "hal/common/error.hpp"
#include "hal/common/keyvalue.hpp"
#include "hal/gridworld/world.hpp"

namespace hal::grid {

namespace {

struct CellRef {
    int r;
    int c;
};

auto pick_empty(const World& w, Rng& rng, int r0, int r1, int c0, int c1, const auto& allowed) -> std::optional<CellRef> {
    std::vector<CellRef> options;
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            if (w.at(r, c) == Cell::Empty && allowed(r, c)) {
                options.push_back({r, c});
            }
        }
    }
    if (options.empty()) {
        return std::nullopt;
    }
    return options[rng.uniform_index(options.size())];
}

auto blank_world(EnvKind kind, int rows, int cols) -> World {
    World w;
    w.kind = kind;
    w.rows = rows;
    w.cols = cols;
    w.cells.assign(static_cast<std::size_t>(rows * cols), Cell::Empty);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (r == 0 || c == 0 || r == rows - 1 || c == cols - 1) {
                w.put(r, c, Cell::Wall);
            }
        }
    }
    w.inventory.assign(static_cast<std::size_t>(kind == EnvKind::Crafting ? craft_item::Count : treasure_item::Count), 0);
    return w;
}

auto try_crafting(std::uint64_t seed, const GenConfig& gen) -> std::optional<World> {
    Rng rng(seed);
    World w = blank_world(EnvKind::Crafting, gen.rows, gen.cols);
    const int interior = gen.rows - 2;
    const int upper_last = interior / 2;    // rows 1..upper_last form the upper half

    const std::array<double, 4> weights = {gen.stone_weight, gen.coal_weight, gen.iron_weight, gen.dirt_weight};
    const std::array<Cell, 4> lower_cells = {Cell::Stone, Cell::Coal, Cell::IronOre, Cell::Dirt};
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);

    for (int r = 1; r <= gen.rows - 2; ++r) {
        for (int c = 1; c <= gen.cols - 2; ++c) {
            const double u = rng.uniform();
            if (r <= upper_last) {
                if (u < gen.tree_density) {
                    w.put(r, c, Cell::Tree);
                } else if (u < gen.tree_density + gen.upper_dirt_density) {
                    w.put(r, c, Cell::Dirt);
                }
                continue;
            }
            double acc = 0.0;
            Cell chosen = lower_cells.back();
            for (std::size_t k = 0; k < weights.size(); ++k) {
                acc += weights[k] / total;
                if (u < acc) {
                    chosen = lower_cells[k];
                    break;
                }
            }
            w.put(r, c, chosen);
        }
    }
    w.put(gen.rows - 2, 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(gen.cols - 2))), Cell::Diamond);

    const auto spawn = pick_empty(w, rng, 1, upper_last, 1, gen.cols - 2, [](int, int) { return true; });
    if (!spawn) {
        return std::nullopt;
    }
    w.agent = {spawn->r, spawn->c, static_cast<Facing>(rng.uniform_int(4))};

    if (w.count(Cell::Tree) < gen.min_trees || w.count(Cell::Stone) < gen.min_stone || w.count(Cell::Coal) < gen.min_coal ||
        w.count(Cell::IronOre) < gen.min_iron) {
        return std::nullopt;
    }
    w.rng = rng.derive(1);
    w.seed = seed;
    return w;
}

// Five R x R rooms (centre plus N/E/S/W) on a 3x3 block layout; corner blocks are solid.
auto try_treasure(std::uint64_t seed, const GenConfig& gen) -> std::optional<World> {
    const int R = gen.room_size;
    const int n = 3 * R + 4;
    Rng rng(seed);
    World w = blank_world(EnvKind::Treasure, n, n);
    const auto origin = [R](int block) { return block * (R + 1) + 1; };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const bool wall_line = r % (R + 1) == 0 || c % (R + 1) == 0;
            const int br = std::min(r / (R + 1), 2);
            const int bc = std::min(c / (R + 1), 2);
            const bool corner = br != 1 && bc != 1;
            if (wall_line || corner) {
                w.put(r, c, Cell::Wall);
            }
        }
    }

    // Side rooms in N, E, S, W order; block coordinates.
    const std::array<std::pair<int, int>, 4> blocks = {{{0, 1}, {1, 2}, {2, 1}, {1, 0}}};
    std::array<int, 4> colour = {0, 1, 2, 3};    // red, yellow, blue, grey
    for (int i = 3; i > 0; --i) {
        std::swap(colour[static_cast<std::size_t>(i)], colour[rng.uniform_index(static_cast<std::size_t>(i + 1))]);
    }
    constexpr std::array<Cell, 4> door_cells = {Cell::DoorRed, Cell::DoorYellow, Cell::DoorBlue, Cell::DoorGrey};
    std::array<CellRef, 4> doors{};
    for (std::size_t side = 0; side < 4; ++side) {
        const int off = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(R)));
        CellRef d{};
        switch (side) {
            case 0: d = {R + 1, origin(1) + off}; break;
            case 1: d = {origin(1) + off, 2 * R + 2}; break;
            case 2: d = {2 * R + 2, origin(1) + off}; break;
            default: d = {origin(1) + off, R + 1}; break;
        }
        doors[side] = d;
        w.put(d.r, d.c, door_cells[static_cast<std::size_t>(colour[side])]);
    }
    const auto room_of_colour = [&](int col) {
        for (std::size_t side = 0; side < 4; ++side) {
            if (colour[side] == col) {
                return blocks[side];
            }
        }
        return blocks[0];
    };
    const auto near_door = [&](int r, int c) {
        for (const auto& d : doors) {
            if (std::abs(d.r - r) + std::abs(d.c - c) <= 1) {
                return true;
            }
        }
        return false;
    };
    const auto place = [&](std::pair<int, int> block, Cell cell, bool obstacle) {
        const int r0 = origin(block.first);
        const int c0 = origin(block.second);
        const auto spot = pick_empty(w, rng, r0, r0 + R - 1, c0, c0 + R - 1, [&](int r, int c) {
            return !(r == w.agent.row && c == w.agent.col) && !(obstacle && near_door(r, c));
        });
        if (!spot) {
            return false;
        }
        w.put(spot->r, spot->c, cell);
        return true;
    };

    const int c0 = origin(1);
    w.agent = {c0 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(R))),
               c0 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(R))), static_cast<Facing>(rng.uniform_int(4))};

    const int config = static_cast<int>(rng.uniform_int(3));    // 0 red only, 1 yellow only, 2 both
    bool ok = true;
    if (config != 1) {
        ok = ok && place({1, 1}, Cell::KeyRed, false);
    }
    if (config != 0) {
        ok = ok && place({1, 1}, Cell::KeyYellow, false);
    }
    ok = ok && place({1, 1}, Cell::Chest, true);
    ok = ok && place(room_of_colour(0), Cell::Ball, false);
    if (config == 0) {
        ok = ok && place(room_of_colour(0), Cell::KeyYellow, false);
    }
    ok = ok && place(room_of_colour(1), Cell::KeyBlue, false);
    if (config == 1) {
        ok = ok && place(room_of_colour(1), Cell::KeyRed, false);
    }
    ok = ok && place(room_of_colour(2), Cell::Scale, true);
    ok = ok && place(room_of_colour(3), Cell::KeyPurple, false);
    if (!ok) {
        return std::nullopt;
    }
    w.rng = rng.derive(1);
    w.seed = seed;
    return w;
}

}    // namespace

auto GenConfig::from(const KeyValues& kv, const std::string& prefix) -> GenConfig {
    GenConfig g;
    const auto key = [&prefix](const char* name) { return prefix + name; };
    g.rows = static_cast<int>(kv.get_int(key("rows"), g.rows));
    g.cols = static_cast<int>(kv.get_int(key("cols"), g.cols));
    g.tree_density = kv.get_double(key("tree_density"), g.tree_density);
    g.upper_dirt_density = kv.get_double(key("upper_dirt_density"), g.upper_dirt_density);
    g.stone_weight = kv.get_double(key("stone_weight"), g.stone_weight);
    g.coal_weight = kv.get_double(key("coal_weight"), g.coal_weight);
    g.iron_weight = kv.get_double(key("iron_weight"), g.iron_weight);
    g.dirt_weight = kv.get_double(key("dirt_weight"), g.dirt_weight);
    g.min_trees = static_cast<int>(kv.get_int(key("min_trees"), g.min_trees));
    g.min_stone = static_cast<int>(kv.get_int(key("min_stone"), g.min_stone));
    g.min_coal = static_cast<int>(kv.get_int(key("min_coal"), g.min_coal));
    g.min_iron = static_cast<int>(kv.get_int(key("min_iron"), g.min_iron));
    g.room_size = static_cast<int>(kv.get_int(key("room_size"), g.room_size));
    g.retry_budget = static_cast<int>(kv.get_int(key("retry_budget"), g.retry_budget));
    if (g.rows < 5 || g.cols < 3) {
        throw ConfigError(key("rows"), "grid too small");
    }
    if (g.room_size < 2) {
        throw ConfigError(key("room_size"), "rooms need at least 2 cells per side");
    }
    if (g.retry_budget < 1) {
        throw ConfigError(key("retry_budget"), "must be positive");
    }
    return g;
}

auto generate(EnvKind kind, std::uint64_t seed, const GenConfig& gen) -> World {
    for (int attempt = 0; attempt < gen.retry_budget; ++attempt) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
        auto w = kind == EnvKind::Crafting ? try_crafting(s, gen) : try_treasure(s, gen);
        if (w) {
            return std::move(*w);
        }
    }
    throw GenerationError("no valid " + to_string(kind) + " world within " + std::to_string(gen.retry_budget) + " seeds from " +
                          std::to_string(seed));
}

auto reset(const TaskSpec& task, std::uint64_t seed) -> World {
    return generate(task.kind, seed, task.gen);
}

}    // namespace hal::grid
