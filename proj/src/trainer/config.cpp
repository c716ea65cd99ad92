#include "hal/trainer/config.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "hal/common/error.hpp"
#include "hal/common/rng.hpp"

namespace hal::trainer {

namespace {

auto join_ints(const std::vector<int>& v) -> std::string {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + std::to_string(v[i]);
    }
    return out;
}

auto join(const std::vector<std::string>& v) -> std::string {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + v[i];
    }
    return out;
}

auto parse_ints(const std::string& key, const std::string& text) -> std::vector<int> {
    std::vector<int> out;
    for (const auto& part : split(text, ',')) {
        const auto t = std::string(trim(part));
        if (t.empty()) {
            continue;
        }
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(t, &used));
            if (used != t.size() || out.back() < 1) {
                throw std::invalid_argument(t);
            }
        } catch (const std::exception&) {
            throw ConfigError(key, "expected a comma-separated list of positive integers");
        }
    }
    return out;
}

auto parse_names(const std::string& text) -> std::vector<std::string> {
    std::vector<std::string> out;
    for (const auto& part : split(text, ',')) {
        const auto t = std::string(trim(part));
        if (!t.empty()) {
            out.push_back(t);
        }
    }
    return out;
}

auto fmt(double v) -> std::string {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

auto bool_text(bool b) -> std::string { return b ? "true" : "false"; }

// Every key a config may carry; anything else is rejected.
auto known_keys() -> const std::vector<std::string>& {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        const auto defaults = RunConfig{}.to_keyvalues();
        for (const auto& entry : defaults.entries()) {
            k.push_back(entry.first);
        }
        return k;
    }();
    return keys;
}

}    // namespace

auto full_task(const std::string& name) -> grid::TaskSpec {
    if (name == "iron") {
        return grid::TaskSpec::crafting("iron_ingot");
    }
    if (name == "diamond") {
        return grid::TaskSpec::crafting("diamond");
    }
    if (name == "treasure") {
        return grid::TaskSpec::treasure();
    }
    if (name.rfind("crafting:", 0) == 0) {
        try {
            return grid::TaskSpec::crafting(name.substr(9));
        } catch (const ConfigError& e) {
            throw ConfigError("env.task", e.what());
        }
    }
    throw ConfigError("env.task", "unknown task '" + name + "' (iron, diamond, treasure, crafting:<milestone>)");
}

auto milestone_ablation(const grid::MilestoneSet& full, int n_removed, std::uint64_t seed) -> grid::MilestoneSet {
    const int k = full.size();
    if (n_removed < 0 || n_removed >= k) {
        throw ConfigError("env.remove_milestones", "must be in [0, " + std::to_string(k - 1) + "]");
    }
    if (n_removed == 0) {
        return full;
    }
    std::vector<int> candidates;
    for (int g = 0; g < k; ++g) {
        if (g != full.final_index()) {
            candidates.push_back(g);
        }
    }
    Rng rng(mix_seed(seed, 0x6d696c65ULL));
    // partial Fisher-Yates
    for (int i = 0; i < n_removed; ++i) {
        const auto j = static_cast<std::size_t>(i) + rng.uniform_index(candidates.size() - static_cast<std::size_t>(i));
        std::swap(candidates[static_cast<std::size_t>(i)], candidates[j]);
    }
    std::vector<bool> drop(static_cast<std::size_t>(k), false);
    for (int i = 0; i < n_removed; ++i) {
        drop[static_cast<std::size_t>(candidates[static_cast<std::size_t>(i)])] = true;
    }
    std::vector<std::string> kept;
    for (int g = 0; g < k; ++g) {
        if (!drop[static_cast<std::size_t>(g)]) {
            kept.push_back(full.symbols()[static_cast<std::size_t>(g)]);
        }
    }
    return grid::MilestoneSet(full.kind(), kept, full.symbols()[static_cast<std::size_t>(full.final_index())]);
}

auto git_blob_sha1(const std::string& text) -> std::string {
    const std::string blob = "blob " + std::to_string(text.size()) + std::string(1, '\0') + text;
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
    std::string hex;
    char buf[3];
    for (unsigned char c : digest) {
        std::snprintf(buf, sizeof(buf), "%02x", c);
        hex += buf;
    }
    return hex;
}

auto RunConfig::to_keyvalues() const -> KeyValues {
    KeyValues kv;
    kv.set("env.task", task);
    kv.set("env.milestones", join(milestones));
    kv.set("env.remove_milestones", std::to_string(remove_milestones));
    kv.set("env.max_env_steps", std::to_string(max_env_steps));
    kv.set("env.view_size", std::to_string(view_size));
    kv.set("env.step_penalty", fmt(step_penalty));
    kv.set("env.edge_rate", fmt(edge_rate));
    kv.set("env.recipes", recipes);
    kv.set("env.gen.rows", std::to_string(gen.rows));
    kv.set("env.gen.cols", std::to_string(gen.cols));
    kv.set("env.gen.tree_density", fmt(gen.tree_density));
    kv.set("env.gen.upper_dirt_density", fmt(gen.upper_dirt_density));
    kv.set("env.gen.stone_weight", fmt(gen.stone_weight));
    kv.set("env.gen.coal_weight", fmt(gen.coal_weight));
    kv.set("env.gen.iron_weight", fmt(gen.iron_weight));
    kv.set("env.gen.dirt_weight", fmt(gen.dirt_weight));
    kv.set("env.gen.min_trees", std::to_string(gen.min_trees));
    kv.set("env.gen.min_stone", std::to_string(gen.min_stone));
    kv.set("env.gen.min_coal", std::to_string(gen.min_coal));
    kv.set("env.gen.min_iron", std::to_string(gen.min_iron));
    kv.set("env.gen.room_size", std::to_string(gen.room_size));
    kv.set("env.gen.retry_budget", std::to_string(gen.retry_budget));

    kv.set("agent.variant", agents::to_string(agent));
    kv.set("agent.task_agnostic", bool_text(task_agnostic));
    kv.set("agent.force_all_ones_mask", bool_text(force_all_ones_mask));

    kv.set("hp.lr", fmt(hp.lr));
    kv.set("hp.adam_eps", fmt(hp.adam_eps));
    kv.set("hp.clip_norm", fmt(hp.clip_norm));
    kv.set("hp.batch", std::to_string(hp.batch));
    kv.set("hp.gamma", fmt(hp.gamma));
    kv.set("hp.target_update", std::to_string(hp.target_update));
    kv.set("hp.exp_steps", std::to_string(hp.exp_steps));
    kv.set("hp.eps_controller_start", fmt(hp.eps_controller_start));
    kv.set("hp.eps_controller_end", fmt(hp.eps_controller_end));
    kv.set("hp.eps_meta_start", fmt(hp.eps_meta_start));
    kv.set("hp.eps_meta_end", fmt(hp.eps_meta_end));
    kv.set("hp.eps_affordance_start", fmt(hp.eps_affordance_start));
    kv.set("hp.eps_affordance_end", fmt(hp.eps_affordance_end));
    kv.set("hp.anneal_fraction", fmt(hp.anneal_fraction));
    kv.set("hp.n_steps", std::to_string(hp.n_steps));
    kv.set("hp.max_option_steps", std::to_string(hp.max_option_steps));
    kv.set("hp.update_freq", std::to_string(hp.update_freq));
    kv.set("hp.meta_update_freq", std::to_string(hp.meta_update_freq));
    kv.set("hp.affordance_update_freq", std::to_string(hp.affordance_update_freq));
    kv.set("hp.representation_update_freq", std::to_string(hp.representation_update_freq));
    kv.set("hp.margin_update_freq", std::to_string(hp.margin_update_freq));
    kv.set("hp.per_alpha", fmt(hp.per_alpha));
    kv.set("hp.per_beta_start", fmt(hp.per_beta_start));
    kv.set("hp.controller_capacity", std::to_string(hp.controller_capacity));
    kv.set("hp.meta_capacity", std::to_string(hp.meta_capacity));
    kv.set("hp.example_capacity", std::to_string(hp.example_capacity));
    kv.set("hp.segment_capacity", std::to_string(hp.segment_capacity));
    kv.set("hp.undiscounted_meta_sum", bool_text(hp.undiscounted_meta_sum));

    kv.set("net.conv", join_ints(net.conv));
    kv.set("net.hidden", join_ints(net.hidden));
    kv.set("net.dueling", bool_text(net.dueling));

    kv.set("aff.conv", join_ints(aff.conv));
    kv.set("aff.hidden", join_ints(aff.hidden));
    kv.set("aff.embed_dim", std::to_string(aff.embed_dim));
    kv.set("aff.alpha", fmt(aff.alpha));
    kv.set("aff.sigma", fmt(aff.sigma));
    kv.set("aff.batch", std::to_string(aff.batch));
    kv.set("aff.knn_n", std::to_string(aff.knn_n));
    kv.set("aff.knn_k", std::to_string(aff.knn_k));
    kv.set("aff.reference_m", std::to_string(aff.reference_m));
    kv.set("aff.holdout", fmt(aff.holdout));
    kv.set("aff.fnf_perc", fmt(aff.fnf_perc));
    kv.set("aff.fnf_conf", fmt(aff.fnf_conf));
    kv.set("aff.tolerance_limit", bool_text(aff.tolerance_limit));
    kv.set("aff.threshold", fmt(aff.threshold));
    kv.set("aff.fnf", bool_text(aff.use_fnf));
    kv.set("aff.rt", bool_text(aff.tune_representation));
    kv.set("aff.rai", bool_text(aff.representation_input));
    kv.set("aff.cl", bool_text(aff.contrastive));

    kv.set("run.steps", std::to_string(steps));
    kv.set("run.seed", std::to_string(seed));
    kv.set("run.envs", std::to_string(envs));
    kv.set("run.log_interval", std::to_string(log_interval));
    kv.set("run.success_window", std::to_string(success_window));
    kv.set("run.serial", bool_text(serial));
    kv.set("run.instrument", bool_text(instrument));
    kv.set("run.preset", preset);
    return kv;
}

auto RunConfig::from_keyvalues(const KeyValues& kv) -> RunConfig {
    const auto& known = known_keys();
    for (const auto& [key, value] : kv.entries()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(key, "unknown configuration key");
        }
    }
    RunConfig c;
    const auto i32 = [&kv](const std::string& key, int fallback) { return static_cast<int>(kv.get_int(key, fallback)); };
    c.task = kv.get_string("env.task", c.task);
    c.milestones = parse_names(kv.get_string("env.milestones", ""));
    c.remove_milestones = i32("env.remove_milestones", c.remove_milestones);
    c.max_env_steps = i32("env.max_env_steps", c.max_env_steps);
    c.view_size = i32("env.view_size", c.view_size);
    c.step_penalty = kv.get_double("env.step_penalty", c.step_penalty);
    c.edge_rate = kv.get_double("env.edge_rate", c.edge_rate);
    c.recipes = kv.get_string("env.recipes", c.recipes);
    c.gen = grid::GenConfig::from(kv, "env.gen.");

    c.agent = agents::parse_variant(kv.get_string("agent.variant", agents::to_string(c.agent)));
    c.task_agnostic = kv.get_bool("agent.task_agnostic", c.task_agnostic);
    c.force_all_ones_mask = kv.get_bool("agent.force_all_ones_mask", c.force_all_ones_mask);

    auto& h = c.hp;
    h.lr = kv.get_double("hp.lr", h.lr);
    h.adam_eps = kv.get_double("hp.adam_eps", h.adam_eps);
    h.clip_norm = kv.get_double("hp.clip_norm", h.clip_norm);
    h.batch = i32("hp.batch", h.batch);
    h.gamma = kv.get_double("hp.gamma", h.gamma);
    h.target_update = i32("hp.target_update", h.target_update);
    h.exp_steps = i32("hp.exp_steps", h.exp_steps);
    h.eps_controller_start = kv.get_double("hp.eps_controller_start", h.eps_controller_start);
    h.eps_controller_end = kv.get_double("hp.eps_controller_end", h.eps_controller_end);
    h.eps_meta_start = kv.get_double("hp.eps_meta_start", h.eps_meta_start);
    h.eps_meta_end = kv.get_double("hp.eps_meta_end", h.eps_meta_end);
    h.eps_affordance_start = kv.get_double("hp.eps_affordance_start", h.eps_affordance_start);
    h.eps_affordance_end = kv.get_double("hp.eps_affordance_end", h.eps_affordance_end);
    h.anneal_fraction = kv.get_double("hp.anneal_fraction", h.anneal_fraction);
    h.n_steps = i32("hp.n_steps", h.n_steps);
    h.max_option_steps = i32("hp.max_option_steps", h.max_option_steps);
    h.update_freq = i32("hp.update_freq", h.update_freq);
    h.meta_update_freq = i32("hp.meta_update_freq", h.meta_update_freq);
    h.affordance_update_freq = i32("hp.affordance_update_freq", h.affordance_update_freq);
    h.representation_update_freq = i32("hp.representation_update_freq", h.representation_update_freq);
    h.margin_update_freq = i32("hp.margin_update_freq", h.margin_update_freq);
    h.per_alpha = kv.get_double("hp.per_alpha", h.per_alpha);
    h.per_beta_start = kv.get_double("hp.per_beta_start", h.per_beta_start);
    h.controller_capacity = i32("hp.controller_capacity", h.controller_capacity);
    h.meta_capacity = i32("hp.meta_capacity", h.meta_capacity);
    h.example_capacity = i32("hp.example_capacity", h.example_capacity);
    h.segment_capacity = i32("hp.segment_capacity", h.segment_capacity);
    h.undiscounted_meta_sum = kv.get_bool("hp.undiscounted_meta_sum", h.undiscounted_meta_sum);

    c.net.conv = parse_ints("net.conv", kv.get_string("net.conv", join_ints(c.net.conv)));
    c.net.hidden = parse_ints("net.hidden", kv.get_string("net.hidden", join_ints(c.net.hidden)));
    c.net.dueling = kv.get_bool("net.dueling", c.net.dueling);

    auto& a = c.aff;
    a.conv = parse_ints("aff.conv", kv.get_string("aff.conv", join_ints(a.conv)));
    a.hidden = parse_ints("aff.hidden", kv.get_string("aff.hidden", join_ints(a.hidden)));
    a.embed_dim = i32("aff.embed_dim", a.embed_dim);
    a.alpha = kv.get_double("aff.alpha", a.alpha);
    a.sigma = kv.get_double("aff.sigma", a.sigma);
    a.batch = i32("aff.batch", a.batch);
    a.knn_n = i32("aff.knn_n", a.knn_n);
    a.knn_k = i32("aff.knn_k", a.knn_k);
    a.reference_m = i32("aff.reference_m", a.reference_m);
    a.holdout = kv.get_double("aff.holdout", a.holdout);
    a.fnf_perc = kv.get_double("aff.fnf_perc", a.fnf_perc);
    a.fnf_conf = kv.get_double("aff.fnf_conf", a.fnf_conf);
    a.tolerance_limit = kv.get_bool("aff.tolerance_limit", a.tolerance_limit);
    a.threshold = kv.get_double("aff.threshold", a.threshold);
    a.use_fnf = kv.get_bool("aff.fnf", a.use_fnf);
    a.tune_representation = kv.get_bool("aff.rt", a.tune_representation);
    a.representation_input = kv.get_bool("aff.rai", a.representation_input);
    a.contrastive = kv.get_bool("aff.cl", a.contrastive);

    c.steps = kv.get_int("run.steps", c.steps);
    c.seed = static_cast<std::uint64_t>(kv.get_int("run.seed", static_cast<std::int64_t>(c.seed)));
    c.envs = i32("run.envs", c.envs);
    c.log_interval = i32("run.log_interval", c.log_interval);
    c.success_window = i32("run.success_window", c.success_window);
    c.serial = kv.get_bool("run.serial", c.serial);
    c.instrument = kv.get_bool("run.instrument", c.instrument);
    c.preset = kv.get_string("run.preset", c.preset);
    c.validate();
    return c;
}

void RunConfig::validate() const {
    const auto require = [](bool ok, const std::string& key, const std::string& msg) {
        if (!ok) {
            throw ConfigError(key, msg);
        }
    };
    (void)build_task();
    require(steps >= 0, "run.steps", "must be nonnegative");
    require(envs >= 1, "run.envs", "need at least one environment");
    require(log_interval >= 1, "run.log_interval", "must be positive");
    require(success_window >= 1, "run.success_window", "must be positive");
    require(max_env_steps >= 1, "env.max_env_steps", "must be positive");
    require(view_size >= 3 && view_size % 2 == 1, "env.view_size", "must be an odd number >= 3");
    require(edge_rate >= 0.0 && edge_rate <= 1.0, "env.edge_rate", "must be a probability");
    try {
        (void)grid::RecipeBook::named(recipes);
    } catch (const ConfigError& e) {
        throw ConfigError("env.recipes", e.what());
    }
    require(hp.batch >= 1, "hp.batch", "must be positive");
    require(hp.gamma > 0.0 && hp.gamma <= 1.0, "hp.gamma", "must be in (0, 1]");
    require(hp.lr >= 0.0, "hp.lr", "must be nonnegative");
    require(hp.adam_eps > 0.0, "hp.adam_eps", "must be positive");
    require(hp.clip_norm >= 0.0, "hp.clip_norm", "must be nonnegative");
    require(hp.n_steps >= 1, "hp.n_steps", "must be positive");
    require(hp.max_option_steps >= 1, "hp.max_option_steps", "must be positive");
    require(hp.exp_steps >= 0, "hp.exp_steps", "must be nonnegative");
    require(hp.anneal_fraction >= 0.0 && hp.anneal_fraction <= 1.0, "hp.anneal_fraction", "must be in [0, 1]");
    for (const auto& [key, value] :
         {std::pair{"hp.target_update", hp.target_update}, {"hp.update_freq", hp.update_freq},
          {"hp.meta_update_freq", hp.meta_update_freq}, {"hp.affordance_update_freq", hp.affordance_update_freq},
          {"hp.representation_update_freq", hp.representation_update_freq},
          {"hp.margin_update_freq", hp.margin_update_freq}, {"hp.controller_capacity", hp.controller_capacity},
          {"hp.meta_capacity", hp.meta_capacity}, {"hp.example_capacity", hp.example_capacity},
          {"hp.segment_capacity", hp.segment_capacity}}) {
        require(value >= 1, key, "must be positive");
    }
    for (const auto& [key, value] :
         {std::pair{"hp.eps_controller_start", hp.eps_controller_start}, {"hp.eps_controller_end", hp.eps_controller_end},
          {"hp.eps_meta_start", hp.eps_meta_start}, {"hp.eps_meta_end", hp.eps_meta_end},
          {"hp.eps_affordance_start", hp.eps_affordance_start}, {"hp.eps_affordance_end", hp.eps_affordance_end},
          {"hp.per_beta_start", hp.per_beta_start}, {"aff.threshold", aff.threshold}, {"aff.holdout", aff.holdout}}) {
        require(value >= 0.0 && value <= 1.0, key, "must be in [0, 1]");
    }
    require(hp.eps_meta_start + hp.eps_affordance_start <= 1.0 && hp.eps_meta_end + hp.eps_affordance_end <= 1.0,
            "hp.eps_affordance_start", "affordance and meta exploration rates must sum to at most 1");
    require(hp.per_alpha >= 0.0, "hp.per_alpha", "must be nonnegative");
    require(aff.embed_dim >= 1, "aff.embed_dim", "must be positive");
    require(aff.batch >= 2, "aff.batch", "need at least 2");
    require(aff.knn_k >= 1 && aff.knn_k <= aff.knn_n, "aff.knn_k", "must be in [1, knn_n]");
    require(aff.reference_m >= 10, "aff.reference_m", "need at least 10 reference points");
    require(aff.fnf_perc > 0.0 && aff.fnf_perc < 1.0, "aff.fnf_perc", "must be in (0, 1)");
    require(aff.fnf_conf > 0.0 && aff.fnf_conf < 1.0, "aff.fnf_conf", "must be in (0, 1)");
    require(aff.alpha >= 0.0, "aff.alpha", "must be nonnegative");
    require(aff.sigma > 0.0, "aff.sigma", "must be positive");
    const bool ablated = !aff.use_fnf || !aff.tune_representation || !aff.representation_input || !aff.contrastive;
    require(!ablated || agent == agents::Variant::Hal, "aff.fnf", "ablation flags require agent.variant = hal");
    require(!force_all_ones_mask || agents::uses_mask(agent), "agent.force_all_ones_mask", "requires a masking agent");
    require(!task_agnostic || agents::is_hierarchical(agent), "agent.task_agnostic", "requires a hierarchical agent");
}

auto RunConfig::build_task() const -> grid::TaskSpec {
    auto task_spec = full_task(task);
    if (!milestones.empty()) {
        const auto& full = task_spec.milestones;
        try {
            task_spec.milestones = grid::MilestoneSet(task_spec.kind, milestones,
                                                      full.symbols()[static_cast<std::size_t>(full.final_index())]);
        } catch (const ConfigError& e) {
            throw ConfigError("env.milestones", e.what());
        }
    }
    task_spec.milestones = milestone_ablation(task_spec.milestones, remove_milestones, seed);
    task_spec.gen = gen;
    task_spec.max_env_steps = max_env_steps;
    task_spec.view_size = view_size;
    task_spec.recipes = recipes;
    task_spec.reward.step_penalty = step_penalty;
    if (edge_rate > 0.0) {
        task_spec.stochasticity = grid::StochasticityConfig::depth_scaled(task_spec.kind, edge_rate);
    }
    return task_spec;
}

auto RunConfig::removed_milestones() const -> std::vector<std::string> {
    auto base = full_task(task);
    const auto before = milestones.empty() ? base.milestones.symbols() : milestones;
    const auto after = build_task().milestones.symbols();
    std::vector<std::string> out;
    for (const auto& s : before) {
        if (std::find(after.begin(), after.end(), s) == after.end()) {
            out.push_back(s);
        }
    }
    return out;
}

}    // namespace hal::trainer
