// File: app.cpp
// Description: Command-line front end

#include "hal/cli/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "hal/cli/plotdata.hpp"
#include "hal/cli/presets.hpp"
#include "hal/common/error.hpp"
#include "hal/trainer/trainer.hpp"

namespace hal::cli {

using trainer::RunConfig;

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Leftover `--key value` tokens from the parser.
auto parse_overrides(const std::vector<std::string>& extras) -> Overrides {
    Overrides out;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const auto& tok = extras[i];
        if (tok.rfind("--", 0) != 0 || tok.size() <= 2) {
            throw ConfigError(tok, "expected --key value");
        }
        auto key = tok.substr(2);
        if (const auto eq = key.find('='); eq != std::string::npos) {
            out.emplace_back(key.substr(0, eq), key.substr(eq + 1));
            continue;
        }
        if (i + 1 >= extras.size()) {
            throw ConfigError(key, "missing value");
        }
        out.emplace_back(key, extras[++i]);
    }
    return out;
}

auto summary_json(const trainer::EvalSummary& s, const grid::TaskSpec& task, const std::string& checkpoint, bool greedy)
    -> nlohmann::ordered_json {
    nlohmann::ordered_json j;
    j["checkpoint"] = checkpoint;
    j["greedy"] = greedy;
    j["episodes"] = s.episodes.size();
    j["success_rate"] = s.success_rate;
    j["mean_length"] = s.mean_length;
    j["subpolicy_success"] = s.subpolicy_success ? nlohmann::ordered_json(*s.subpolicy_success) : nlohmann::ordered_json();
    auto rows = nlohmann::ordered_json::array();
    for (const auto& e : s.episodes) {
        nlohmann::ordered_json r;
        r["success"] = e.success;
        r["length"] = e.length;
        r["options"] = e.options;
        r["options_succeeded"] = e.options_succeeded;
        auto achieved = nlohmann::ordered_json::array();
        for (std::size_t g = 0; g < e.achieved.size(); ++g) {
            if (e.achieved[g]) {
                achieved.push_back(task.milestones.symbols()[g]);
            }
        }
        r["achieved"] = achieved;
        rows.push_back(r);
    }
    j["rows"] = rows;
    return j;
}

struct RunFlags {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> steps;
    std::string out;
    bool serial = false;
};

auto cmd_run(const RunFlags& f, const Overrides& overrides, std::ostream& out) -> int {
    const auto root = output_root(f.out);
    Overrides all = overrides;
    if (f.steps) {
        all.emplace_back("run.steps", std::to_string(*f.steps));
    }
    if (f.serial) {
        all.emplace_back("run.serial", "true");
    }
    std::vector<std::pair<std::string, RunConfig>> runs;
    if (!f.preset.empty()) {
        std::vector<std::uint64_t> seeds;
        if (f.seed) {
            seeds.push_back(*f.seed);
        }
        for (auto& r : expand_preset(f.preset, seeds).runs) {
            runs.emplace_back(r.label, apply_overrides(r.config, all));
        }
    } else {
        auto base = f.config.empty() ? RunConfig{} : load_run_config(f.config);
        if (f.seed) {
            all.emplace_back("run.seed", std::to_string(*f.seed));
        }
        auto c = apply_overrides(base, all);
        runs.emplace_back(agents::to_string(c.agent), std::move(c));
    }
    for (const auto& [label, c] : runs) {
        const auto dir = run_directory(root, c.preset.empty() ? "custom" : c.preset, label, c.seed);
        trainer::run_training(c, dir);
        out << dir.string() << '\n';
    }
    return 0;
}

struct EvalFlags {
    std::string checkpoint;
    int episodes = 10;
    std::uint64_t seed = 0;
    bool stochastic = false;
    std::string trajectory;
    std::string summary;
};

auto cmd_eval(const EvalFlags& f, std::ostream& out) -> int {
    auto loaded = trainer::load_checkpoint(f.checkpoint);
    trainer::AgentPolicy policy(*loaded.agent, loaded.config, !f.stochastic, f.seed);
    std::ofstream traj;
    if (!f.trajectory.empty()) {
        traj.open(f.trajectory);
        if (!traj) {
            throw Error("cannot write " + f.trajectory);
        }
    }
    const auto s = trainer::evaluate(policy, loaded.task,
                                     {f.episodes, f.seed, loaded.config.hp.max_option_steps, traj.is_open() ? &traj : nullptr});
    const auto text = summary_json(s, loaded.task, f.checkpoint, !f.stochastic).dump(2);
    if (!f.summary.empty()) {
        std::ofstream o(f.summary);
        o << text << '\n';
    }
    out << text << '\n';
    return 0;
}

auto cmd_plotdata(const std::string& pattern, const std::string& metric, const std::string& path, std::ostream& out)
    -> int {
    std::vector<trainer::MetricTable> tables;
    for (const auto& file : resolve_metric_files(pattern)) {
        std::ifstream in(file);
        tables.push_back(trainer::read_metric_table(in, file));
    }
    const auto rows = aggregate_metric(tables, metric);
    if (path.empty()) {
        write_aggregate(out, metric, rows);
    } else {
        std::ofstream o(path);
        write_aggregate(o, metric, rows);
    }
    return 0;
}

auto cmd_presets(const std::string& name, bool show_config, std::ostream& out) -> int {
    if (name.empty()) {
        for (const auto& n : preset_names()) {
            const auto p = expand_preset(n);
            out << n << ": " << p.runs.size() << " runs (" << p.agents.size() << " variants x " << p.seeds.size()
                << " seeds)\n";
        }
        return 0;
    }
    for (const auto& r : expand_preset(name).runs) {
        out << r.label << ' ' << r.config.seed << '\n';
        if (show_config) {
            out << r.config.to_keyvalues().to_text() << '\n';
        }
    }
    return 0;
}

}    // namespace

auto load_run_config(const std::string& path) -> RunConfig {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        std::ifstream in(path);
        if (!in) {
            throw Error("cannot read " + path);
        }
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.contains("config") || !j["config"].is_object()) {
            throw ConfigError("config", path + " is not a run manifest");
        }
        KeyValues kv;
        for (const auto& [k, v] : j["config"].items()) {
            kv.set(k, v.get<std::string>());
        }
        return RunConfig::from_keyvalues(kv);
    }
    return RunConfig::from_keyvalues(KeyValues::load(path));
}

auto apply_overrides(const RunConfig& base, const Overrides& overrides) -> RunConfig {
    auto kv = base.to_keyvalues();
    for (const auto& [k, v] : overrides) {
        if (!kv.contains(k)) {
            throw ConfigError(k, "unknown configuration key");
        }
        kv.set(k, v);
    }
    return RunConfig::from_keyvalues(kv);
}

auto run_directory(const std::filesystem::path& root, const std::string& preset, const std::string& label,
                   std::uint64_t seed) -> std::filesystem::path {
    return root / preset / label / std::to_string(seed);
}

auto output_root(const std::string& flag) -> std::filesystem::path {
    if (!flag.empty()) {
        return flag;
    }
    if (const char* env = std::getenv("HAL_OUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return "runs";
}

auto run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) -> int {
    CLI::App app{"Hierarchical affordance learning laboratory", "hal"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "Train one configuration or every run of a preset");
    run->add_option("--config", rf.config, "Key-value config file or manifest.json");
    run->add_option("--preset", rf.preset, "Experiment preset name");
    run->add_option("--seed", rf.seed, "Seed (restricts a preset to this seed)");
    run->add_option("--steps", rf.steps, "Environment step budget");
    run->add_option("--out", rf.out, "Artifact root (default $HAL_OUT_DIR or ./runs)");
    run->add_flag("--serial", rf.serial, "Deterministic serial stepping");
    run->allow_extras();
    run->get_option("--config")->excludes("--preset");

    EvalFlags ef;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval->add_option("--checkpoint", ef.checkpoint, "Checkpoint file")->required();
    eval->add_option("--episodes", ef.episodes, "Episodes to run");
    eval->add_option("--seed", ef.seed, "Evaluation seed");
    eval->add_flag("--stochastic", ef.stochastic, "Use the final exploration rates instead of greedy selection");
    eval->add_option("--dump-trajectory", ef.trajectory, "Write the first episode as a trajectory file");
    eval->add_option("--summary", ef.summary, "Also write the summary JSON here");

    std::string pattern;
    std::string metric = "success_rate";
    std::string plot_out;
    auto* plot = app.add_subcommand("plotdata", "Aggregate metric logs across seeds");
    plot->add_option("--runs", pattern, "Glob of run directories or metrics.csv files")->required();
    plot->add_option("--metric", metric, "Metric column");
    plot->add_option("--out", plot_out, "Output CSV (default stdout)");

    std::string preset_name;
    bool show_config = false;
    auto* presets = app.add_subcommand("presets", "List presets or expand one");
    presets->add_option("name", preset_name, "Preset to expand");
    presets->add_flag("--show-config", show_config, "Print each expanded configuration");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    try {
        if (run->parsed()) {
            return cmd_run(rf, parse_overrides(run->remaining()), out);
        }
        if (eval->parsed()) {
            return cmd_eval(ef, out);
        }
        if (plot->parsed()) {
            return cmd_plotdata(pattern, metric, plot_out, out);
        }
        return cmd_presets(preset_name, show_config, out);
    } catch (const ConfigError& e) {
        err << "error: invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const ChecksumError& e) {
        err << "error: checksum mismatch: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}    // namespace hal::cli
