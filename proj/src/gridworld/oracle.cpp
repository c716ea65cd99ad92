#include "hal/gridworld/oracle.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

namespace hal::grid {

namespace {

constexpr int kDr[4] = {-1, 0, 1, 0};
constexpr int kDc[4] = {0, 1, 0, -1};

struct Node {
    std::vector<Cell> cells;
    std::vector<int> inventory;
};

class Search {
public:
    Search(const World& world, const TaskSpec& task)
        : task_(task), rows_(world.rows), cols_(world.cols), anchor_(static_cast<int>(world.index(world.agent.row, world.agent.col))) {
        found_.assign(event_names(world.kind).size(), false);
        remaining_ = task.milestones.size();
    }

    auto run(const World& world) -> AffordanceVector {
        stack_.push_back({world.cells, world.inventory});
        while (!stack_.empty() && remaining_ > 0) {
            Node node = std::move(stack_.back());
            stack_.pop_back();
            if (task_.kind == EnvKind::Crafting) {
                expand_crafting(node);
            } else {
                expand_treasure(node);
            }
        }
        AffordanceVector out(static_cast<std::size_t>(task_.milestones.size()));
        for (int m = 0; m < task_.milestones.size(); ++m) {
            out.set(static_cast<std::size_t>(m), found_[static_cast<std::size_t>(task_.milestones.event_of(m))]);
        }
        return out;
    }

private:
    [[nodiscard]] auto is_milestone(int event) const -> bool { return task_.milestones.index_of_event(event) >= 0; }

    void mark(int event) {
        if (is_milestone(event) && !found_[static_cast<std::size_t>(event)]) {
            found_[static_cast<std::size_t>(event)] = true;
            --remaining_;
        }
    }

    auto region_of(const std::vector<Cell>& cells) const -> std::vector<char> {
        std::vector<char> in(cells.size(), 0);
        std::vector<int> queue{anchor_};
        in[static_cast<std::size_t>(anchor_)] = 1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int r = queue[head] / cols_;
            const int c = queue[head] % cols_;
            for (int d = 0; d < 4; ++d) {
                const int nr = r + kDr[d];
                const int nc = c + kDc[d];
                if (nr < 0 || nr >= rows_ || nc < 0 || nc >= cols_) {
                    continue;
                }
                const int q = nr * cols_ + nc;
                if (!in[static_cast<std::size_t>(q)] && is_passable(cells[static_cast<std::size_t>(q)])) {
                    in[static_cast<std::size_t>(q)] = 1;
                    queue.push_back(q);
                }
            }
        }
        return in;
    }

    template <typename Fn>
    void for_neighbours(int p, Fn&& fn) const {
        const int r = p / cols_;
        const int c = p % cols_;
        for (int d = 0; d < 4; ++d) {
            const int nr = r + kDr[d];
            const int nc = c + kDc[d];
            if (nr >= 0 && nr < rows_ && nc >= 0 && nc < cols_) {
                fn(nr * cols_ + nc);
            }
        }
    }

    auto visit(const Node& node, const std::string& extra = {}) -> bool {
        std::string key(node.cells.size() + node.inventory.size() * 4 + extra.size(), '\0');
        std::size_t i = 0;
        for (const Cell c : node.cells) {
            key[i++] = static_cast<char>(c);
        }
        for (const int n : node.inventory) {
            for (int b = 0; b < 4; ++b) {
                key[i++] = static_cast<char>((n >> (8 * b)) & 0xff);
            }
        }
        std::copy(extra.begin(), extra.end(), key.begin() + static_cast<std::ptrdiff_t>(i));
        return seen_.insert(std::move(key)).second;
    }

    // ---- CRAFTING ----------------------------------------------------------

    static auto mined_event(int item) -> int {
        return event_index(EnvKind::Crafting, item_names(EnvKind::Crafting)[static_cast<std::size_t>(item)]);
    }

    // Clear every reachable neighbour whose mining fires no milestone.
    void close_mining(Node& node, std::vector<char>& region) const {
        const auto& book = task_.recipe_book();
        bool changed = true;
        while (changed) {
            changed = false;
            const int tier = book.held_tier(node.inventory);
            for (int p = 0; p < static_cast<int>(node.cells.size()); ++p) {
                if (!region[static_cast<std::size_t>(p)]) {
                    continue;
                }
                for_neighbours(p, [&](int q) {
                    auto& cell = node.cells[static_cast<std::size_t>(q)];
                    const auto* rule = book.mining_rule(cell);
                    if (rule == nullptr || tier < rule->tier || (rule->yields >= 0 && is_milestone(mined_event(rule->yields)))) {
                        return;
                    }
                    cell = Cell::Empty;
                    if (rule->yields >= 0) {
                        ++node.inventory[static_cast<std::size_t>(rule->yields)];
                    }
                    changed = true;
                });
            }
            if (changed) {
                region = region_of(node.cells);
            }
        }
    }

    auto station_near(const Node& node, int p, Cell station) const -> bool {
        if (station == Cell::Void) {
            return true;
        }
        const int r = p / cols_;
        const int c = p % cols_;
        const int rad = task_.station_radius;
        for (int dr = -rad; dr <= rad; ++dr) {
            for (int dc = -rad; dc <= rad; ++dc) {
                const int nr = r + dr;
                const int nc = c + dc;
                if (nr >= 0 && nr < rows_ && nc >= 0 && nc < cols_ && node.cells[static_cast<std::size_t>(nr * cols_ + nc)] == station) {
                    return true;
                }
            }
        }
        return false;
    }

    void expand_crafting(Node node) {
        const auto& book = task_.recipe_book();
        auto region = region_of(node.cells);
        close_mining(node, region);
        if (!visit(node)) {
            return;
        }
        const int tier = book.held_tier(node.inventory);
        const auto n = static_cast<int>(node.cells.size());

        // Milestone-firing mining.
        for (int p = 0; p < n; ++p) {
            if (!region[static_cast<std::size_t>(p)]) {
                continue;
            }
            for_neighbours(p, [&](int q) {
                const auto* rule = book.mining_rule(node.cells[static_cast<std::size_t>(q)]);
                if (rule != nullptr && rule->yields >= 0 && tier >= rule->tier) {
                    mark(mined_event(rule->yields));
                }
            });
        }

        for (const auto& recipe : book.recipes()) {
            const bool has_inputs = std::all_of(recipe.inputs.begin(), recipe.inputs.end(),
                                                [&](const auto& in) { return node.inventory[static_cast<std::size_t>(in.first)] >= in.second; });
            if (!has_inputs) {
                continue;
            }
            const bool milestone = is_milestone(recipe.event);
            if (milestone && found_[static_cast<std::size_t>(recipe.event)]) {
                continue;
            }
            if (recipe.places == Cell::Void) {
                bool possible = false;
                for (int p = 0; p < n && !possible; ++p) {
                    possible = region[static_cast<std::size_t>(p)] && station_near(node, p, recipe.station);
                }
                if (!possible) {
                    continue;
                }
                if (milestone) {
                    mark(recipe.event);
                    continue;
                }
                Node child = node;
                for (const auto& [item, count] : recipe.inputs) {
                    child.inventory[static_cast<std::size_t>(item)] -= count;
                }
                child.inventory[static_cast<std::size_t>(recipe.output_item)] += recipe.output_count;
                stack_.push_back(std::move(child));
                continue;
            }

            // Placement: collect every empty cell the station could be put on.
            bool exists = false;
            for (int p = 0; p < n && !exists; ++p) {
                exists = region[static_cast<std::size_t>(p)] && node.cells[static_cast<std::size_t>(p)] == recipe.places;
            }
            std::vector<char> target(static_cast<std::size_t>(n), 0);
            bool possible = false;
            for (int p = 0; p < n; ++p) {
                if (!region[static_cast<std::size_t>(p)] || !station_near(node, p, recipe.station)) {
                    continue;
                }
                for_neighbours(p, [&](int q) {
                    if (node.cells[static_cast<std::size_t>(q)] == Cell::Empty) {
                        target[static_cast<std::size_t>(q)] = 1;
                        possible = true;
                    }
                });
            }
            if (!possible) {
                continue;
            }
            if (milestone) {
                mark(recipe.event);
                continue;
            }
            if (exists) {
                continue;
            }
            for (int q = 0; q < n; ++q) {
                if (!target[static_cast<std::size_t>(q)]) {
                    continue;
                }
                Node child = node;
                for (const auto& [item, count] : recipe.inputs) {
                    child.inventory[static_cast<std::size_t>(item)] -= count;
                }
                child.cells[static_cast<std::size_t>(q)] = recipe.places;
                stack_.push_back(std::move(child));
            }
        }
    }

    // ---- TREASURE ----------------------------------------------------------

    static auto object_of(Cell cell) -> std::pair<int, int> {
        switch (cell) {
            case Cell::KeyRed: return {treasure_item::RedKey, treasure_event::RedKey};
            case Cell::KeyYellow: return {treasure_item::YellowKey, treasure_event::YellowKey};
            case Cell::KeyBlue: return {treasure_item::BlueKey, treasure_event::BlueKey};
            case Cell::KeyPurple: return {treasure_item::PurpleKey, treasure_event::PurpleKey};
            case Cell::Ball: return {treasure_item::Ball, treasure_event::Ball};
            default: return {-1, -1};
        }
    }

    static auto cell_of(int item) -> Cell {
        constexpr Cell cells[] = {Cell::KeyRed, Cell::KeyYellow, Cell::KeyBlue, Cell::KeyPurple, Cell::Ball};
        return cells[item];
    }

    void expand_treasure(Node node) {
        const auto region = region_of(node.cells);
        const auto n = static_cast<int>(node.cells.size());

        // Objects lying anywhere inside the region are interchangeable by
        // position: key them by type only.
        Node canonical = node;
        std::string objects;
        for (int p = 0; p < n; ++p) {
            const auto [item, ev] = object_of(node.cells[static_cast<std::size_t>(p)]);
            if (item >= 0 && region[static_cast<std::size_t>(p)]) {
                canonical.cells[static_cast<std::size_t>(p)] = Cell::Empty;
                objects.push_back(static_cast<char>('a' + item));
            }
        }
        std::sort(objects.begin(), objects.end());
        if (!visit(canonical, objects)) {
            return;
        }

        int held = -1;
        for (std::size_t i = 0; i < node.inventory.size(); ++i) {
            if (node.inventory[i] > 0) {
                held = static_cast<int>(i);
            }
        }
        const auto has_region_neighbour = [&](int p) {
            bool any = false;
            for_neighbours(p, [&](int q) { any = any || region[static_cast<std::size_t>(q)]; });
            return any;
        };
        const auto fire = [&](int event, Node child) {
            if (is_milestone(event)) {
                mark(event);
            } else {
                stack_.push_back(std::move(child));
            }
        };

        if (held < 0) {
            for (int p = 0; p < n; ++p) {
                const auto [item, ev] = object_of(node.cells[static_cast<std::size_t>(p)]);
                if (item < 0 || !region[static_cast<std::size_t>(p)] || !has_region_neighbour(p) || found_[static_cast<std::size_t>(ev)]) {
                    continue;
                }
                Node child = node;
                child.cells[static_cast<std::size_t>(p)] = Cell::Empty;
                child.inventory[static_cast<std::size_t>(item)] = 1;
                fire(ev, std::move(child));
            }
            return;
        }

        bool dropped = false;
        for (int p = 0; p < n; ++p) {
            const Cell cell = node.cells[static_cast<std::size_t>(p)];
            if (region[static_cast<std::size_t>(p)]) {
                if (!dropped && cell == Cell::Empty && has_region_neighbour(p)) {
                    Node child = node;
                    child.cells[static_cast<std::size_t>(p)] = cell_of(held);
                    child.inventory[static_cast<std::size_t>(held)] = 0;
                    stack_.push_back(std::move(child));
                    dropped = true;
                }
                continue;
            }
            if (!has_region_neighbour(p)) {
                continue;
            }
            int event = -1;
            Cell after = cell;
            if (cell == Cell::DoorRed && held == treasure_item::RedKey) {
                event = treasure_event::RedDoor;
                after = Cell::DoorOpen;
            } else if (cell == Cell::DoorYellow && held == treasure_item::YellowKey) {
                event = treasure_event::YellowDoor;
                after = Cell::DoorOpen;
            } else if (cell == Cell::DoorBlue && held == treasure_item::BlueKey) {
                event = treasure_event::BlueDoor;
                after = Cell::DoorOpen;
            } else if (cell == Cell::Scale && held == treasure_item::Ball) {
                event = treasure_event::Scale;
                after = Cell::ScaleLoaded;
            } else if (cell == Cell::Chest && held == treasure_item::PurpleKey) {
                event = treasure_event::Treasure;
            }
            if (event < 0 || found_[static_cast<std::size_t>(event)]) {
                continue;
            }
            Node child = node;
            child.cells[static_cast<std::size_t>(p)] = after;
            child.inventory[static_cast<std::size_t>(held)] = 0;
            if (event == treasure_event::Scale) {
                std::replace(child.cells.begin(), child.cells.end(), Cell::DoorGrey, Cell::DoorOpen);
            }
            fire(event, std::move(child));
        }
    }

    const TaskSpec& task_;
    int rows_;
    int cols_;
    int anchor_;
    int remaining_ = 0;
    std::vector<bool> found_;
    std::vector<Node> stack_;
    std::unordered_set<std::string> seen_;
};

}    // namespace

auto oracle_affordances(const World& world, const TaskSpec& task) -> AffordanceVector {
    Search search(world, task);
    return search.run(world);
}

}    // namespace hal::grid
