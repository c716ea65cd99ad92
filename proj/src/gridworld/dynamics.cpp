#include <algorithm>
#include <cmath>
#include <sstream>

#include "hal/common/error.hpp"
#include "hal/gridworld/world.hpp"

namespace hal::grid {

namespace {

auto carried_cell(int item) -> Cell {
    switch (item) {
        case treasure_item::RedKey: return Cell::KeyRed;
        case treasure_item::YellowKey: return Cell::KeyYellow;
        case treasure_item::BlueKey: return Cell::KeyBlue;
        case treasure_item::PurpleKey: return Cell::KeyPurple;
        default: return Cell::Ball;
    }
}

// Object cell -> (item, pickup event)
auto object_item(Cell cell) -> std::pair<int, int> {
    switch (cell) {
        case Cell::KeyRed: return {treasure_item::RedKey, treasure_event::RedKey};
        case Cell::KeyYellow: return {treasure_item::YellowKey, treasure_event::YellowKey};
        case Cell::KeyBlue: return {treasure_item::BlueKey, treasure_event::BlueKey};
        case Cell::KeyPurple: return {treasure_item::PurpleKey, treasure_event::PurpleKey};
        case Cell::Ball: return {treasure_item::Ball, treasure_event::Ball};
        default: return {-1, -1};
    }
}

auto near_station(const World& w, Cell station, int radius) -> bool {
    for (int dr = -radius; dr <= radius; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
            if (w.at(w.agent.row + dr, w.agent.col + dc) == station) {
                return true;
            }
        }
    }
    return false;
}

auto resolve_crafting(World& w, int action, int radius, const RecipeBook& book) -> int {
    const auto f = forward_offset(w.agent.facing);
    const int fr = w.agent.row + f.dr;
    const int fc = w.agent.col + f.dc;
    if (action == action::Mine) {
        const auto* rule = book.mining_rule(w.at(fr, fc));
        if (rule == nullptr || book.held_tier(w.inventory) < rule->tier) {
            return -1;
        }
        w.put(fr, fc, Cell::Empty);
        if (rule->yields < 0) {
            return -1;
        }
        ++w.inventory[static_cast<std::size_t>(rule->yields)];
        return event_index(EnvKind::Crafting, item_names(EnvKind::Crafting)[static_cast<std::size_t>(rule->yields)]);
    }
    const auto& recipe = book.recipes().at(static_cast<std::size_t>(action - action::FirstCraft));
    for (const auto& [item, count] : recipe.inputs) {
        if (w.inventory[static_cast<std::size_t>(item)] < count) {
            return -1;
        }
    }
    if (recipe.station != Cell::Void && !near_station(w, recipe.station, radius)) {
        return -1;
    }
    if (recipe.places != Cell::Void) {
        if (w.at(fr, fc) != Cell::Empty) {
            return -1;
        }
        w.put(fr, fc, recipe.places);
    } else {
        w.inventory[static_cast<std::size_t>(recipe.output_item)] += recipe.output_count;
    }
    for (const auto& [item, count] : recipe.inputs) {
        w.inventory[static_cast<std::size_t>(item)] -= count;
    }
    return recipe.event;
}

auto resolve_treasure(World& w) -> int {
    const auto f = forward_offset(w.agent.facing);
    const int fr = w.agent.row + f.dr;
    const int fc = w.agent.col + f.dc;
    const Cell front = w.at(fr, fc);
    const int held = w.carried();
    if (held < 0) {
        const auto [item, event] = object_item(front);
        if (item < 0) {
            return -1;
        }
        w.inventory[static_cast<std::size_t>(item)] = 1;
        w.put(fr, fc, Cell::Empty);
        return event;
    }
    const auto consume = [&] { w.inventory[static_cast<std::size_t>(held)] = 0; };
    if ((front == Cell::DoorRed && held == treasure_item::RedKey) || (front == Cell::DoorYellow && held == treasure_item::YellowKey) ||
        (front == Cell::DoorBlue && held == treasure_item::BlueKey)) {
        w.put(fr, fc, Cell::DoorOpen);
        consume();
        return front == Cell::DoorRed ? treasure_event::RedDoor
               : front == Cell::DoorYellow ? treasure_event::YellowDoor
                                            : treasure_event::BlueDoor;
    }
    if (front == Cell::Scale && held == treasure_item::Ball) {
        w.put(fr, fc, Cell::ScaleLoaded);
        consume();
        std::replace(w.cells.begin(), w.cells.end(), Cell::DoorGrey, Cell::DoorOpen);
        return treasure_event::Scale;
    }
    if (front == Cell::Chest && held == treasure_item::PurpleKey) {
        consume();
        return treasure_event::Treasure;
    }
    if (front == Cell::Empty) {
        w.put(fr, fc, carried_cell(held));
        consume();
    }
    return -1;
}

}    // namespace

auto World::count(Cell cell) const -> int {
    return static_cast<int>(std::count(cells.begin(), cells.end(), cell));
}

auto World::carried() const -> int {
    if (kind != EnvKind::Treasure) {
        return -1;
    }
    for (std::size_t i = 0; i < inventory.size(); ++i) {
        if (inventory[i] > 0) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

MilestoneSet::MilestoneSet(EnvKind kind, std::vector<std::string> symbols, const std::string& final_symbol)
    : kind_(kind), symbols_(std::move(symbols)) {
    const auto catalogue = event_names(kind);
    lookup_.assign(catalogue.size(), -1);
    final_index_ = -1;
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        const int ev = event_index(kind, symbols_[i]);
        if (ev < 0) {
            throw ConfigError("milestones", "unknown milestone '" + symbols_[i] + "' for " + to_string(kind));
        }
        if (lookup_[static_cast<std::size_t>(ev)] >= 0) {
            throw ConfigError("milestones", "duplicate milestone '" + symbols_[i] + "'");
        }
        lookup_[static_cast<std::size_t>(ev)] = static_cast<int>(i);
        events_.push_back(ev);
        if (symbols_[i] == final_symbol) {
            final_index_ = static_cast<int>(i);
        }
    }
    if (final_index_ < 0) {
        throw ConfigError("milestones", "final milestone '" + final_symbol + "' missing from milestone set");
    }
}

auto MilestoneSet::full(EnvKind kind, const std::string& final_symbol) -> MilestoneSet {
    const auto names = event_names(kind);
    return {kind, std::vector<std::string>(names.begin(), names.end()), final_symbol};
}

auto MilestoneSet::index_of(const std::string& symbol) const -> int {
    const auto it = std::find(symbols_.begin(), symbols_.end(), symbol);
    return it == symbols_.end() ? -1 : static_cast<int>(it - symbols_.begin());
}

auto StochasticityConfig::depth_scaled(EnvKind kind, double rate) -> StochasticityConfig {
    StochasticityConfig cfg;
    const auto items = item_names(kind);
    const auto depths = event_depths(kind);
    for (const auto& name : items) {
        const int ev = event_index(kind, name);
        const int d = ev < 0 ? 0 : depths[static_cast<std::size_t>(ev)];
        cfg.disappear_prob.push_back(rate * std::ldexp(1.0, -d));
    }
    return cfg;
}

auto StochasticityConfig::active() const -> bool {
    return std::any_of(disappear_prob.begin(), disappear_prob.end(), [](double p) { return p > 0.0; });
}

auto TaskSpec::crafting(const std::string& final_symbol) -> TaskSpec {
    TaskSpec t;
    t.kind = EnvKind::Crafting;
    t.milestones = MilestoneSet::full(EnvKind::Crafting, final_symbol);
    return t;
}

auto TaskSpec::treasure() -> TaskSpec {
    TaskSpec t;
    t.kind = EnvKind::Treasure;
    t.milestones = MilestoneSet::full(EnvKind::Treasure, "treasure");
    return t;
}

auto TaskSpec::action_count() const -> int {
    if (kind == EnvKind::Crafting) {
        return action::FirstCraft + static_cast<int>(recipe_book().recipes().size());
    }
    return action::Interact + 1;
}

auto TaskSpec::action_name(int a) const -> std::string {
    static const char* const movement[] = {"turn_left", "turn_right", "forward", "backward"};
    if (a < 0 || a >= action_count()) {
        throw Error("invalid action index " + std::to_string(a));
    }
    if (a < 4) {
        return movement[a];
    }
    if (kind == EnvKind::Treasure) {
        return "interact";
    }
    if (a == action::Mine) {
        return "mine";
    }
    return "craft_" + recipe_book().recipes()[static_cast<std::size_t>(a - action::FirstCraft)].name;
}

void apply_edge_stochasticity(World& world, const StochasticityConfig& config) {
    const std::size_t n = std::min(config.disappear_prob.size(), world.inventory.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double p = config.disappear_prob[i];
        if (p > 0.0 && world.inventory[i] > 0 && world.rng.bernoulli(p)) {
            --world.inventory[i];
        }
    }
}

auto resolve_action(World& world, int action, const TaskSpec& task) -> int {
    auto& pose = world.agent;
    if (action == action::TurnLeft) {
        pose.facing = turn_left(pose.facing);
        return -1;
    }
    if (action == action::TurnRight) {
        pose.facing = turn_right(pose.facing);
        return -1;
    }
    if (action == action::Forward || action == action::Backward) {
        const auto f = forward_offset(pose.facing);
        const int sign = action == action::Forward ? 1 : -1;
        const int r = pose.row + sign * f.dr;
        const int c = pose.col + sign * f.dc;
        if (world.in_bounds(r, c) && is_passable(world.at(r, c))) {
            pose.row = r;
            pose.col = c;
        }
        return -1;
    }
    return world.kind == EnvKind::Crafting ? resolve_crafting(world, action, task.station_radius, task.recipe_book()) : resolve_treasure(world);
}

auto step(World& world, int action, const TaskSpec& task) -> StepResult {
    if (action < 0 || action >= task.action_count()) {
        throw Error("invalid action index " + std::to_string(action) + " for " + to_string(task.kind));
    }
    if (task.stochasticity.active()) {
        apply_edge_stochasticity(world, task.stochasticity);
    }
    StepResult out;
    out.event = resolve_action(world, action, task);
    ++world.step_count;

    const int k = task.milestones.size();
    out.milestones = MilestoneVector(static_cast<std::size_t>(k));
    if (out.event >= 0) {
        out.milestone = task.milestones.index_of_event(out.event);
        if (out.milestone >= 0) {
            out.milestones.set(static_cast<std::size_t>(out.milestone));
        }
    }
    out.terminated = out.milestone >= 0 && out.milestone == task.milestones.final_index();
    out.reward = (out.terminated ? task.reward.success : 0.0) - task.reward.step_penalty;
    out.done = out.terminated || world.step_count >= task.max_env_steps;
    out.obs = observe(world, task.view_size);
    return out;
}

auto observe(const World& world, int view_size) -> Observation {
    Observation obs;
    obs.view.resize(static_cast<std::size_t>(view_size * view_size));
    const auto f = forward_offset(world.agent.facing);
    const auto rt = right_offset(world.agent.facing);
    const int centre = view_size / 2;
    for (int i = 0; i < view_size; ++i) {
        const int ahead = centre - i;
        for (int j = 0; j < view_size; ++j) {
            const int right = j - centre;
            const int r = world.agent.row + ahead * f.dr + right * rt.dr;
            const int c = world.agent.col + ahead * f.dc + right * rt.dc;
            obs.view[static_cast<std::size_t>(i * view_size + j)] = static_cast<std::uint8_t>(channel_of(world.kind, world.at(r, c)));
        }
    }
    obs.inventory.reserve(world.inventory.size());
    for (const int n : world.inventory) {
        obs.inventory.push_back(static_cast<std::int16_t>(std::min(n, 32767)));
    }
    return obs;
}

auto render(const World& world) -> std::string {
    static const char glyph[kCellTypeCount] = {' ', '.', '#', 'T', 'S', 'C', 'I', 'd', 'D', 'B', 'F', 'r',
                                               'y', 'b', 'g', '_', '1', '2', '3', '4', 'o', 'W', 'w', '$'};
    static const char arrow[4] = {'^', '>', 'v', '<'};
    std::ostringstream out;
    for (int r = 0; r < world.rows; ++r) {
        for (int c = 0; c < world.cols; ++c) {
            if (r == world.agent.row && c == world.agent.col) {
                out << arrow[static_cast<int>(world.agent.facing)];
            } else {
                out << glyph[static_cast<int>(world.at(r, c))];
            }
        }
        out << '\n';
    }
    out << "inventory:";
    for (std::size_t i = 0; i < world.inventory.size(); ++i) {
        if (world.inventory[i] > 0) {
            out << ' ' << item_names(world.kind)[i] << '=' << world.inventory[i];
        }
    }
    out << '\n';
    return out.str();
}

}    // namespace hal::grid
