// File: core.cpp
// Description: Python bindings: environments with oracle affordances, filter
// statistics, configuration, presets, training and evaluation

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <map>

#include "hal/affordance/filter.hpp"
#include "hal/cli/presets.hpp"
#include "hal/common/error.hpp"
#include "hal/gridworld/oracle.hpp"
#include "hal/gridworld/recipes.hpp"
#include "hal/trainer/trainer.hpp"

namespace py = pybind11;
using namespace hal;

namespace {

using ConfigDict = std::map<std::string, std::string>;

auto to_dict(const trainer::RunConfig& c) -> ConfigDict {
    ConfigDict d;
    const auto kv = c.to_keyvalues();
    for (const auto& [k, v] : kv.entries()) {
        d[k] = v;
    }
    return d;
}

// Unspecified keys keep their defaults.
auto from_dict(const ConfigDict& d) -> trainer::RunConfig {
    auto kv = trainer::RunConfig{}.to_keyvalues();
    for (const auto& [k, v] : d) {
        kv.set(k, v);
    }
    return trainer::RunConfig::from_keyvalues(kv);
}

auto bits(const grid::BitVector& b) -> std::vector<bool> {
    std::vector<bool> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        out[i] = b[i];
    }
    return out;
}

auto obs_dict(const grid::Observation& o, int view) -> py::dict {
    py::dict d;
    std::vector<std::vector<int>> grid_rows(static_cast<std::size_t>(view), std::vector<int>(static_cast<std::size_t>(view)));
    for (int r = 0; r < view; ++r) {
        for (int c = 0; c < view; ++c) {
            grid_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = o.view[static_cast<std::size_t>(r * view + c)];
        }
    }
    d["view"] = grid_rows;
    d["inventory"] = std::vector<int>(o.inventory.begin(), o.inventory.end());
    return d;
}

class Env {
public:
    explicit Env(const ConfigDict& config) : config_(from_dict(config)), task_(config_.build_task()) {}

    auto reset(std::uint64_t seed) -> py::dict {
        world_ = grid::reset(task_, seed);
        return obs_dict(grid::observe(world_, task_.view_size), task_.view_size);
    }

    auto step(int action) -> py::tuple {
        if (world_.cells.empty()) {
            throw Error("reset() must be called before step()");
        }
        if (action < 0 || action >= task_.action_count()) {
            throw ConfigError("action", "out of range");
        }
        const auto r = grid::step(world_, action, task_);
        py::dict info;
        info["milestone"] = r.milestone >= 0 ? py::object(py::str(task_.milestones.symbols()[static_cast<std::size_t>(r.milestone)]))
                                             : py::object(py::none());
        info["terminated"] = r.terminated;
        return py::make_tuple(obs_dict(r.obs, task_.view_size), r.reward, r.done, info);
    }

    [[nodiscard]] auto affordances() const -> std::vector<bool> { return bits(grid::oracle_affordances(world_, task_)); }
    [[nodiscard]] auto milestones() const -> std::vector<std::string> { return task_.milestones.symbols(); }
    [[nodiscard]] auto actions() const -> std::vector<std::string> {
        std::vector<std::string> out;
        for (int a = 0; a < task_.action_count(); ++a) {
            out.push_back(task_.action_name(a));
        }
        return out;
    }
    [[nodiscard]] auto inventory_items() const -> std::vector<std::string> {
        std::vector<std::string> out;
        for (const auto& n : grid::item_names(task_.kind)) {
            out.emplace_back(n);
        }
        return out;
    }

private:
    trainer::RunConfig config_;
    grid::TaskSpec task_;
    grid::World world_;
};

auto read_metrics(const std::string& path) -> py::dict {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read " + path);
    }
    const auto t = trainer::read_metric_table(in, path);
    py::dict d;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        py::list col;
        for (const auto& row : t.rows) {
            col.append(row[c] ? py::object(py::float_(*row[c])) : py::object(py::none()));
        }
        d[py::str(t.columns[c])] = col;
    }
    return d;
}

auto evaluate_checkpoint(const std::string& path, int episodes, std::uint64_t seed, bool greedy) -> py::dict {
    auto loaded = trainer::load_checkpoint(path);
    trainer::AgentPolicy policy(*loaded.agent, loaded.config, greedy, seed);
    const auto s = trainer::evaluate(policy, loaded.task, {episodes, seed, loaded.config.hp.max_option_steps, nullptr});
    py::dict d;
    d["episodes"] = s.episodes.size();
    d["success_rate"] = s.success_rate;
    d["mean_length"] = s.mean_length;
    d["subpolicy_success"] = s.subpolicy_success ? py::object(py::float_(*s.subpolicy_success)) : py::object(py::none());
    return d;
}

}    // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hierarchical affordance learning laboratory";

    auto base = py::register_exception<Error>(m, "HalError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ChecksumError>(m, "ChecksumError", base.ptr());

    py::class_<Env>(m, "Env")
        .def(py::init<const ConfigDict&>(), py::arg("config") = ConfigDict{})
        .def("reset", &Env::reset, py::arg("seed") = 0)
        .def("step", &Env::step, py::arg("action"))
        .def("affordances", &Env::affordances)
        .def_property_readonly("milestones", &Env::milestones)
        .def_property_readonly("actions", &Env::actions)
        .def_property_readonly("inventory_items", &Env::inventory_items);

    m.def("default_config", [] { return to_dict(trainer::RunConfig{}); });
    m.def("resolve_config", [](const ConfigDict& d) { return to_dict(from_dict(d)); }, py::arg("config"));
    m.def("desk_config", [](const std::string& task) { return to_dict(cli::desk_config(task)); }, py::arg("task"));
    m.def("preset_names", &cli::preset_names);
    m.def(
        "expand_preset",
        [](const std::string& name, const std::vector<std::uint64_t>& seeds) {
            std::vector<std::pair<std::string, ConfigDict>> out;
            for (const auto& r : cli::expand_preset(name, seeds).runs) {
                out.emplace_back(r.label, to_dict(r.config));
            }
            return out;
        },
        py::arg("name"), py::arg("seeds") = std::vector<std::uint64_t>{});

    m.def(
        "train",
        [](const ConfigDict& d, const std::filesystem::path& out) {
            const auto config = from_dict(d);
            py::gil_scoped_release release;
            const auto a = trainer::run_training(config, out);
            return std::map<std::string, std::filesystem::path>{
                {"metrics", a.metrics}, {"manifest", a.manifest}, {"checkpoint", a.checkpoint}};
        },
        py::arg("config"), py::arg("out_dir"));
    m.def("evaluate_checkpoint", &evaluate_checkpoint, py::arg("path"), py::arg("episodes") = 10, py::arg("seed") = 0,
          py::arg("greedy") = true);
    m.def("read_metrics", &read_metrics, py::arg("path"));

    m.def("tolerance_factor", &affordance::tolerance_factor, py::arg("m"), py::arg("percentile"), py::arg("confidence"));
    m.def(
        "fit_filter_margin",
        [](const std::vector<double>& scores, double perc, double conf, bool tolerance) {
            return affordance::fit_filter_margin(scores, perc, conf, tolerance).rho;
        },
        py::arg("scores"), py::arg("percentile") = 0.9, py::arg("confidence") = 0.95, py::arg("tolerance") = true);
    m.def("recipes_text", [] { return grid::RecipeBook::builtin().text(); });
    m.def("git_blob_sha1", &trainer::git_blob_sha1, py::arg("text"));
}
