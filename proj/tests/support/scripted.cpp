#include "support/scripted.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace hal::testing {

using namespace hal::grid;

namespace {

constexpr int kDr[4] = {-1, 0, 1, 0};
constexpr int kDc[4] = {0, 1, 0, -1};

auto milestone_fires(const TaskSpec& task, int event) -> bool {
    return event >= 0 && task.milestones.index_of_event(event) >= 0;
}

// Cells that can be cleared on the way without firing a milestone.
auto clearable(const World& w, const TaskSpec& task, Cell cell) -> bool {
    if (w.kind != EnvKind::Crafting) {
        return false;
    }
    const auto& book = task.recipe_book();
    const auto* rule = book.mining_rule(cell);
    if (rule == nullptr || book.held_tier(w.inventory) < rule->tier) {
        return false;
    }
    if (rule->yields < 0) {
        return true;
    }
    const int ev = event_index(EnvKind::Crafting, item_names(EnvKind::Crafting)[static_cast<std::size_t>(rule->yields)]);
    return !milestone_fires(task, ev);
}

auto facing_to(int dr, int dc) -> Facing {
    if (dr < 0) {
        return Facing::North;
    }
    if (dr > 0) {
        return Facing::South;
    }
    return dc > 0 ? Facing::East : Facing::West;
}

auto turn_toward(Facing from, Facing to) -> int {
    const int diff = (static_cast<int>(to) - static_cast<int>(from) + 4) % 4;
    return diff == 3 ? action::TurnLeft : action::TurnRight;
}

// Goal: stand on a cell `p` and face a neighbour `q` with accept(p, q) true.
// Returns the first primitive action of a cheapest route, `act` when already
// in position, or -1.
template <typename Accept>
auto route(const World& w, const TaskSpec& task, Accept accept, int act) -> int {
    const int n = w.rows * w.cols;
    const int start = static_cast<int>(w.index(w.agent.row, w.agent.col));
    // Already in place?
    {
        const auto f = forward_offset(w.agent.facing);
        if (w.in_bounds(w.agent.row + f.dr, w.agent.col + f.dc) &&
            accept(start, static_cast<int>(w.index(w.agent.row + f.dr, w.agent.col + f.dc)))) {
            return act;
        }
    }
    std::vector<int> dist(static_cast<std::size_t>(n), std::numeric_limits<int>::max());
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    using Item = std::pair<int, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[static_cast<std::size_t>(start)] = 0;
    pq.push({0, start});
    int goal = -1;
    int goal_face = -1;
    while (!pq.empty()) {
        const auto [d, p] = pq.top();
        pq.pop();
        if (d != dist[static_cast<std::size_t>(p)]) {
            continue;
        }
        const int r = p / w.cols;
        const int c = p % w.cols;
        for (int k = 0; k < 4; ++k) {
            const int nr = r + kDr[k];
            const int nc = c + kDc[k];
            if (w.in_bounds(nr, nc) && accept(p, nr * w.cols + nc)) {
                goal = p;
                goal_face = nr * w.cols + nc;
                break;
            }
        }
        if (goal >= 0) {
            break;
        }
        for (int k = 0; k < 4; ++k) {
            const int nr = r + kDr[k];
            const int nc = c + kDc[k];
            if (!w.in_bounds(nr, nc)) {
                continue;
            }
            const Cell cell = w.at(nr, nc);
            int cost = 0;
            if (is_passable(cell)) {
                cost = 1;
            } else if (clearable(w, task, cell)) {
                cost = 2;
            } else {
                continue;
            }
            const int q = nr * w.cols + nc;
            if (d + cost < dist[static_cast<std::size_t>(q)]) {
                dist[static_cast<std::size_t>(q)] = d + cost;
                parent[static_cast<std::size_t>(q)] = p;
                pq.push({d + cost, q});
            }
        }
    }
    if (goal < 0) {
        return -1;
    }
    int next = goal_face;
    if (goal != start) {
        next = goal;
        while (parent[static_cast<std::size_t>(next)] != start) {
            next = parent[static_cast<std::size_t>(next)];
        }
    }
    const Facing want = facing_to(next / w.cols - w.agent.row, next % w.cols - w.agent.col);
    if (want != w.agent.facing) {
        return turn_toward(w.agent.facing, want);
    }
    if (goal == start) {
        return act;
    }
    return is_passable(w.cells[static_cast<std::size_t>(next)]) ? action::Forward : action::Mine;
}

auto near_station(const World& w, int p, Cell station, int radius) -> bool {
    if (station == Cell::Void) {
        return true;
    }
    const int r = p / w.cols;
    const int c = p % w.cols;
    for (int dr = -radius; dr <= radius; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
            if (w.at(r + dr, c + dc) == station) {
                return true;
            }
        }
    }
    return false;
}

auto crafting_action_for(const World& w, const TaskSpec& task, int event) -> int {
    const auto& book = task.recipe_book();
    for (std::size_t i = 0; i < book.recipes().size(); ++i) {
        const auto& recipe = book.recipes()[i];
        if (recipe.event != event) {
            continue;
        }
        for (const auto& [item, count] : recipe.inputs) {
            if (w.inventory[static_cast<std::size_t>(item)] < count) {
                return -1;
            }
        }
        const int act = action::FirstCraft + static_cast<int>(i);
        return route(
            w, task,
            [&](int p, int q) {
                if (!near_station(w, p, recipe.station, task.station_radius)) {
                    return false;
                }
                return recipe.places == Cell::Void || w.cells[static_cast<std::size_t>(q)] == Cell::Empty;
            },
            act);
    }
    // Mining event: find the cell type that yields it.
    for (int c = 0; c < kCellTypeCount; ++c) {
        const auto* rule = book.mining_rule(static_cast<Cell>(c));
        if (rule == nullptr || rule->yields < 0 ||
            event_index(EnvKind::Crafting, item_names(EnvKind::Crafting)[static_cast<std::size_t>(rule->yields)]) != event) {
            continue;
        }
        if (book.held_tier(w.inventory) < rule->tier) {
            return -1;
        }
        const Cell target = static_cast<Cell>(c);
        return route(
            w, task, [&](int, int q) { return w.cells[static_cast<std::size_t>(q)] == target; },
            action::Mine);
    }
    return -1;
}

auto object_cell(int event) -> Cell {
    switch (event) {
        case treasure_event::RedKey: return Cell::KeyRed;
        case treasure_event::YellowKey: return Cell::KeyYellow;
        case treasure_event::BlueKey: return Cell::KeyBlue;
        case treasure_event::PurpleKey: return Cell::KeyPurple;
        case treasure_event::Ball: return Cell::Ball;
        default: return Cell::Void;
    }
}

auto treasure_action_for(const World& w, const TaskSpec& task, int event) -> int {
    const Cell obj = object_cell(event);
    const int held = w.carried();
    if (obj != Cell::Void) {
        if (held >= 0) {
            // Hands full: drop onto any empty cell first.
            return route(w, task, [&](int, int q) { return w.cells[static_cast<std::size_t>(q)] == Cell::Empty; }, action::Interact);
        }
        return route(w, task, [&](int, int q) { return w.cells[static_cast<std::size_t>(q)] == obj; }, action::Interact);
    }
    Cell target = Cell::Void;
    int needed = -1;
    switch (event) {
        case treasure_event::RedDoor: target = Cell::DoorRed; needed = treasure_item::RedKey; break;
        case treasure_event::YellowDoor: target = Cell::DoorYellow; needed = treasure_item::YellowKey; break;
        case treasure_event::BlueDoor: target = Cell::DoorBlue; needed = treasure_item::BlueKey; break;
        case treasure_event::Scale: target = Cell::Scale; needed = treasure_item::Ball; break;
        case treasure_event::Treasure: target = Cell::Chest; needed = treasure_item::PurpleKey; break;
        default: return -1;
    }
    if (held != needed) {
        return -1;
    }
    return route(w, task, [&](int, int q) { return w.cells[static_cast<std::size_t>(q)] == target; }, action::Interact);
}

auto crafting_next_event(const World& w, const TaskSpec& task) -> int {
    using namespace craft_item;
    const auto inv = [&](int item) { return w.inventory[static_cast<std::size_t>(item)]; };
    const bool diamond_task = task.milestones.event_of(task.milestones.final_index()) == craft_event::Diamond;
    const int ingots_needed = diamond_task ? 3 : 1;

    const auto get_wood = [&](int n) { return inv(Wood) >= n ? -1 : (inv(Log) > 0 ? craft_event::Wood : craft_event::Log); };
    const auto get_sticks = [&](int n) {
        if (inv(Stick) >= n) {
            return -1;
        }
        const int e = get_wood(2);
        return e >= 0 ? e : craft_event::Stick;
    };

    if (w.count(Cell::CraftingBench) == 0) {
        const int e = get_wood(4);
        return e >= 0 ? e : craft_event::CraftingBench;
    }
    if (inv(WoodPickaxe) == 0 && inv(StonePickaxe) == 0 && inv(IronPickaxe) == 0) {
        if (const int e = get_sticks(2); e >= 0) {
            return e;
        }
        const int e = get_wood(3);
        return e >= 0 ? e : craft_event::WoodPickaxe;
    }
    if (inv(StonePickaxe) == 0 && inv(IronPickaxe) == 0) {
        if (const int e = get_sticks(2); e >= 0) {
            return e;
        }
        return inv(Stone) < 3 ? craft_event::Stone : craft_event::StonePickaxe;
    }
    if (w.count(Cell::Furnace) == 0) {
        return inv(Stone) < 8 ? craft_event::Stone : craft_event::Furnace;
    }
    if (inv(IronIngot) < ingots_needed && inv(IronPickaxe) == 0) {
        if (inv(Coal) == 0) {
            return craft_event::Coal;
        }
        if (inv(IronOre) == 0) {
            return craft_event::IronOre;
        }
        return craft_event::IronIngot;
    }
    if (!diamond_task) {
        return craft_event::IronIngot;
    }
    if (inv(IronPickaxe) == 0) {
        if (const int e = get_sticks(2); e >= 0) {
            return e;
        }
        return craft_event::IronPickaxe;
    }
    return craft_event::Diamond;
}

auto treasure_next_event(const World& w) -> int {
    using namespace treasure_event;
    // Region reachable from the agent.
    std::vector<char> region(w.cells.size(), 0);
    std::vector<int> queue{static_cast<int>(w.index(w.agent.row, w.agent.col))};
    region[static_cast<std::size_t>(queue[0])] = 1;
    for (std::size_t h = 0; h < queue.size(); ++h) {
        const int r = queue[h] / w.cols;
        const int c = queue[h] % w.cols;
        for (int k = 0; k < 4; ++k) {
            const int nr = r + kDr[k];
            const int nc = c + kDc[k];
            const int q = nr * w.cols + nc;
            if (w.in_bounds(nr, nc) && !region[static_cast<std::size_t>(q)] && is_passable(w.at(nr, nc))) {
                region[static_cast<std::size_t>(q)] = 1;
                queue.push_back(q);
            }
        }
    }
    const auto touches = [&](Cell cell) {
        for (int p = 0; p < static_cast<int>(w.cells.size()); ++p) {
            if (w.cells[static_cast<std::size_t>(p)] != cell) {
                continue;
            }
            if (region[static_cast<std::size_t>(p)]) {
                return true;
            }
            const int r = p / w.cols;
            const int c = p % w.cols;
            for (int k = 0; k < 4; ++k) {
                if (w.in_bounds(r + kDr[k], c + kDc[k]) && region[w.index(r + kDr[k], c + kDc[k])]) {
                    return true;
                }
            }
        }
        return false;
    };
    const int held = w.carried();
    if (held == treasure_item::PurpleKey) {
        return Treasure;
    }
    if (held == treasure_item::Ball && touches(Cell::Scale)) {
        return Scale;
    }
    if (held == treasure_item::RedKey && touches(Cell::DoorRed)) {
        return RedDoor;
    }
    if (held == treasure_item::YellowKey && touches(Cell::DoorYellow)) {
        return YellowDoor;
    }
    if (held == treasure_item::BlueKey && touches(Cell::DoorBlue)) {
        return BlueDoor;
    }
    if (touches(Cell::KeyPurple) && touches(Cell::Chest)) {
        return PurpleKey;
    }
    if (touches(Cell::Ball) && touches(Cell::Scale)) {
        return Ball;
    }
    if (touches(Cell::KeyRed) && touches(Cell::DoorRed)) {
        return RedKey;
    }
    if (touches(Cell::KeyYellow) && touches(Cell::DoorYellow)) {
        return YellowKey;
    }
    if (touches(Cell::KeyBlue) && touches(Cell::DoorBlue)) {
        return BlueKey;
    }
    return -1;
}

}    // namespace

auto scripted_action_for(const World& world, const TaskSpec& task, int event) -> int {
    return world.kind == EnvKind::Crafting ? crafting_action_for(world, task, event) : treasure_action_for(world, task, event);
}

auto scripted_next_event(const World& world, const TaskSpec& task) -> int {
    return world.kind == EnvKind::Crafting ? crafting_next_event(world, task) : treasure_next_event(world);
}

auto scripted_action(const World& world, const TaskSpec& task) -> int {
    const int event = scripted_next_event(world, task);
    return event < 0 ? -1 : scripted_action_for(world, task, event);
}

}    // namespace hal::testing
