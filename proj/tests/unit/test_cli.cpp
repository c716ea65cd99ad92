// File: test_cli.cpp
// Description: Command-line runs, evaluation, presets and cross-seed aggregation

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hal/cli/app.hpp"
#include "hal/cli/plotdata.hpp"
#include "hal/cli/presets.hpp"
#include "hal/common/error.hpp"
#include "hal/gridworld/trajectory.hpp"
#include "hal/trainer/trainer.hpp"

using namespace hal;
using namespace hal::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

auto invoke(std::vector<std::string> args) -> Result {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

auto slurp(const fs::path& p) -> std::string {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

auto scratch(const std::string& name) -> fs::path {
    const auto dir = fs::temp_directory_path() / ("hal_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small quick configuration written as a key-value file.
auto small_config_file(const fs::path& dir) -> fs::path {
    trainer::RunConfig c;
    c.agent = agents::Variant::Hal;
    c.steps = 1500;
    c.log_interval = 500;
    c.max_env_steps = 200;
    c.gen.rows = 10;
    c.gen.cols = 10;
    c.net.conv = {4};
    c.net.hidden = {16};
    c.aff.conv = {4};
    c.aff.hidden = {16};
    c.aff.embed_dim = 8;
    c.aff.knn_n = 100;
    c.aff.reference_m = 20;
    const auto path = dir / "small.cfg";
    std::ofstream(path) << c.to_keyvalues().to_text();
    return path;
}

void write_table(const fs::path& path, const std::vector<double>& success) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    trainer::write_metric_header(out, {"log"});
    for (std::size_t i = 0; i < success.size(); ++i) {
        trainer::MetricRow row;
        row.step = static_cast<std::int64_t>((i + 1) * 100);
        row.success_rate = success[i];
        row.milestone_rates = {std::nullopt};
        trainer::write_metric_row(out, row);
    }
}

}    // namespace

TEST_CASE("run validates configuration and names the field") {
    const auto dir = scratch("invalid");
    const auto cfg = small_config_file(dir);
    auto r = invoke({"run", "--config", cfg.string(), "--out", dir.string(), "--env.milestones", "log,wood"});
    CHECK(r.code == 2);
    CHECK(r.err.find("env.milestones") != std::string::npos);

    r = invoke({"run", "--config", cfg.string(), "--out", dir.string(), "--hp.nonsense", "3"});
    CHECK(r.code == 2);
    CHECK(r.err.find("hp.nonsense") != std::string::npos);

    r = invoke({"run", "--preset", "no_such_preset", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("preset") != std::string::npos);

    r = invoke({"frobnicate"});
    CHECK(r.code == 2);
    fs::remove_all(dir);
}

TEST_CASE("run writes artifacts, honours overrides and reproduces from its manifest") {
    const auto dir = scratch("run");
    const auto cfg = small_config_file(dir);
    auto r = invoke({"run", "--config", cfg.string(), "--out", (dir / "a").string(), "--seed", "7", "--serial"});
    REQUIRE(r.code == 0);
    const auto run_dir = dir / "a" / "custom" / "hal" / "7";
    CHECK(r.out == run_dir.string() + "\n");
    REQUIRE(fs::exists(run_dir / "metrics.csv"));
    REQUIRE(fs::exists(run_dir / "ckpt" / "final.ckpt"));
    const auto manifest = slurp(run_dir / "manifest.json");
    CHECK(manifest.find("\"run.seed\": \"7\"") != std::string::npos);
    CHECK(manifest.find("\"recipes_sha1\"") != std::string::npos);

    // same config and seed, serial: identical logs
    r = invoke({"run", "--config", cfg.string(), "--out", (dir / "b").string(), "--seed", "7"});
    REQUIRE(r.code == 0);
    const auto log_a = slurp(run_dir / "metrics.csv");
    CHECK(log_a == slurp(dir / "b" / "custom" / "hal" / "7" / "metrics.csv"));

    // re-running from the manifest reproduces the log
    r = invoke({"run", "--config", (run_dir / "manifest.json").string(), "--out", (dir / "c").string()});
    REQUIRE(r.code == 0);
    CHECK(log_a == slurp(dir / "c" / "custom" / "hal" / "7" / "metrics.csv"));

    // HAL_OUT_DIR is the default root
    ::setenv("HAL_OUT_DIR", (dir / "env").string().c_str(), 1);
    r = invoke({"run", "--config", cfg.string(), "--steps", "0"});
    ::unsetenv("HAL_OUT_DIR");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "env" / "custom" / "hal" / "0" / "metrics.csv"));
    CHECK(output_root("x") == fs::path("x"));
    fs::remove_all(dir);
}

TEST_CASE("eval summarises episodes, dumps trajectories and rejects corrupt checkpoints") {
    const auto dir = scratch("eval");
    const auto cfg = small_config_file(dir);
    REQUIRE(invoke({"run", "--config", cfg.string(), "--out", dir.string(), "--steps", "0"}).code == 0);
    const auto ckpt = dir / "custom" / "hal" / "0" / "ckpt" / "final.ckpt";
    const auto traj = dir / "traj.jsonl";
    auto r = invoke({"eval", "--checkpoint", ckpt.string(), "--episodes", "1", "--dump-trajectory", traj.string()});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["episodes"] == 1);
    CHECK(j["rows"].size() == 1);
    CHECK(j["greedy"] == true);
    CHECK(j["rows"][0]["length"] == 200);

    std::ifstream in(traj);
    const auto parsed = grid::read_trajectory(in);
    CHECK(parsed.records.size() == 200);
    std::ostringstream again;
    grid::write_trajectory(again, parsed);
    CHECK(again.str() == slurp(traj));

    r = invoke({"eval", "--checkpoint", ckpt.string(), "--episodes", "0"});
    CHECK(r.code == 2);

    auto bytes = slurp(ckpt);
    bytes[bytes.size() - 3] ^= 0x11;
    std::ofstream(ckpt, std::ios::binary) << bytes;
    r = invoke({"eval", "--checkpoint", ckpt.string(), "--episodes", "1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("checksum") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("plotdata aggregates seeds with a normal 95% interval") {
    const auto dir = scratch("plot");
    write_table(dir / "one" / "0" / "metrics.csv", {0.1, 0.4});
    auto r = invoke({"plotdata", "--runs", (dir / "one" / "*").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out == "step,n,success_rate_mean,success_rate_ci_low,success_rate_ci_high\n100,1,0.1,,\n200,1,0.4,,\n");

    for (int s = 0; s < 5; ++s) {
        write_table(dir / "same" / std::to_string(s) / "metrics.csv", {0.25, 0.5});
    }
    std::vector<trainer::MetricTable> same;
    for (const auto& f : resolve_metric_files((dir / "same" / "*").string())) {
        std::ifstream in(f);
        same.push_back(trainer::read_metric_table(in));
    }
    for (const auto& row : aggregate_metric(same, "success_rate")) {
        CHECK(row.n == 5);
        CHECK(*row.ci_high - *row.ci_low == 0.0);
    }

    const std::vector<double> values = {0.1, 0.3, 0.35, 0.6, 0.9};
    for (int s = 0; s < 5; ++s) {
        write_table(dir / "var" / std::to_string(s) / "metrics.csv", {values[static_cast<std::size_t>(s)]});
    }
    const auto out = dir / "agg.csv";
    REQUIRE(invoke({"plotdata", "--runs", (dir / "var" / "*").string(), "--metric", "success_rate", "--out", out.string()}).code == 0);
    std::vector<trainer::MetricTable> var;
    for (const auto& f : resolve_metric_files((dir / "var" / "*").string())) {
        std::ifstream in(f);
        var.push_back(trainer::read_metric_table(in));
    }
    const auto rows = aggregate_metric(var, "success_rate");
    REQUIRE(rows.size() == 1);
    const double mean = 0.45;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    const double half = 1.96 * std::sqrt(ss / 4.0) / std::sqrt(5.0);
    CHECK(rows[0].mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(std::abs(*rows[0].ci_high - (mean + half)) < 1e-6);
    CHECK(std::abs(*rows[0].ci_low - (mean - half)) < 1e-6);
    CHECK(slurp(out).find("100,5,0.45,") != std::string::npos);

    r = invoke({"plotdata", "--runs", (dir / "var" / "*").string(), "--metric", "bogus"});
    CHECK(r.code == 2);
    r = invoke({"plotdata", "--runs", (dir / "nothing*").string()});
    CHECK(r.code == 1);
    std::ofstream(dir / "old.csv") << "# hal-metrics v0\nstep\n1\n";
    r = invoke({"plotdata", "--runs", (dir / "old.csv").string()});
    CHECK(r.code == 1);
    fs::remove_all(dir);
}

TEST_CASE("presets expand deterministically to valid configurations") {
    const std::vector<std::string> expected = {"learning_iron", "learning_treasure", "milestone_robustness",
                                               "stochasticity", "task_agnostic", "ablations", "hparam_sweep"};
    CHECK(preset_names() == expected);
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const auto a = expand_preset(name);
        const auto b = expand_preset(name);
        CHECK(a.seeds.size() == 5);
        REQUIRE(a.runs.size() == a.agents.size() * a.seeds.size());
        for (std::size_t i = 0; i < a.runs.size(); ++i) {
            CHECK(a.runs[i].label == b.runs[i].label);
            CHECK(a.runs[i].config.to_keyvalues().to_text() == b.runs[i].config.to_keyvalues().to_text());
            CHECK(a.runs[i].config.preset == name);
            CHECK_NOTHROW(a.runs[i].config.validate());
        }
    }
    const auto iron = expand_preset("learning_iron", {3});
    CHECK(iron.runs.size() == iron.agents.size());
    CHECK(iron.runs[0].config.seed == 3);
    CHECK(iron.agents[0] == "hal_oracle");

    const auto abl = expand_preset("ablations", {0});
    CHECK(!abl.runs.back().config.aff.use_fnf);
    CHECK(abl.runs.back().label == "hal-fnf");
    CHECK(expand_preset("task_agnostic", {0}).runs[0].config.task_agnostic);
    CHECK(run_directory("r", "p", "hal", 4) == fs::path("r/p/hal/4"));

    auto r = invoke({"presets"});
    CHECK(r.code == 0);
    CHECK(r.out.find("ablations: 25 runs") != std::string::npos);
}
