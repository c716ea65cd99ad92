#include "hal/trainer/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "hal/agents/variant.hpp"
#include "hal/common/error.hpp"
#include "hal/common/keyvalue.hpp"

namespace hal::trainer {

namespace {

auto cell(const std::optional<double>& v) -> std::string {
    if (!v || !std::isfinite(*v)) {
        return "";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", *v);
    return buf;
}

auto ratio(std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    return den > 0 ? std::optional<double>(100.0 * static_cast<double>(num) / static_cast<double>(den)) : std::nullopt;
}

}    // namespace

auto compute_mask_metrics(const grid::AffordanceMask& mask, const grid::AffordanceVector& oracle,
                          std::span<const float> meta_q) -> MaskMetrics {
    if (mask.size() != oracle.size() || mask.size() == 0) {
        throw ShapeError("mask metrics: mask and oracle sizes differ");
    }
    const auto k = static_cast<double>(mask.size());
    int agree = 0;
    int pruned = 0;
    int over = 0;
    int under = 0;
    for (std::size_t g = 0; g < mask.size(); ++g) {
        agree += mask[g] == oracle[g] ? 1 : 0;
        pruned += mask[g] ? 0 : 1;
        over += (oracle[g] && !mask[g]) ? 1 : 0;
        under += (!oracle[g] && mask[g]) ? 1 : 0;
    }
    MaskMetrics m;
    m.accuracy = 100.0 * agree / k;
    m.pruning = 100.0 * pruned / k;
    m.overpruning = 100.0 * over / k;
    m.underpruning = 100.0 * under / k;
    if (!meta_q.empty()) {
        if (meta_q.size() != mask.size()) {
            throw ShapeError("mask metrics: Q-value count differs from mask size");
        }
        m.impact = !mask[static_cast<std::size_t>(agents::argmax(meta_q))];
    }
    return m;
}

void MaskAccumulator::add(const MaskMetrics& m) {
    ++n_;
    impact_ += m.impact ? 1 : 0;
    accuracy_ += m.accuracy;
    pruning_ += m.pruning;
    over_ += m.overpruning;
    under_ += m.underpruning;
}

auto MaskAccumulator::mean() const -> std::optional<MaskMetrics> {
    if (n_ == 0) {
        return std::nullopt;
    }
    const auto n = static_cast<double>(n_);
    MaskMetrics m;
    m.accuracy = accuracy_ / n;
    m.pruning = pruning_ / n;
    m.overpruning = over_ / n;
    m.underpruning = under_ / n;
    return m;
}

auto MaskAccumulator::impact_rate() const -> std::optional<double> { return ratio(impact_, n_); }

auto filter_metrics(const affordance::FilterStats& stats, const affordance::AffordanceModel* model) -> FilterMetrics {
    FilterMetrics f;
    if (model != nullptr) {
        double sum = 0.0;
        int n = 0;
        for (int g = 0; g < model->milestones(); ++g) {
            if (model->margin(g)) {
                sum += model->margin(g)->rho;
                ++n;
            }
        }
        if (n > 0) {
            f.margin = sum / n;
        }
    }
    f.true_negative_accuracy = ratio(stats.kept_true, stats.true_negatives);
    f.false_negative_accuracy = ratio(stats.flagged_false, stats.false_negatives);
    f.false_negative_pct = ratio(stats.false_negatives, stats.labelled);
    f.flagged_pct = ratio(stats.flagged, stats.candidates);
    return f;
}

void EpisodeWindow::push(EpisodeStats e) {
    items_.push_back(std::move(e));
    while (items_.size() > capacity_) {
        items_.pop_front();
    }
}

auto EpisodeWindow::success_rate() const -> std::optional<double> {
    if (items_.empty()) {
        return std::nullopt;
    }
    double s = 0.0;
    for (const auto& e : items_) {
        s += e.success ? 1.0 : 0.0;
    }
    return s / static_cast<double>(items_.size());
}

auto EpisodeWindow::mean_length() const -> std::optional<double> {
    if (items_.empty()) {
        return std::nullopt;
    }
    double s = 0.0;
    for (const auto& e : items_) {
        s += e.length;
    }
    return s / static_cast<double>(items_.size());
}

auto EpisodeWindow::subpolicy_success() const -> std::optional<double> {
    std::int64_t options = 0;
    std::int64_t ok = 0;
    for (const auto& e : items_) {
        options += e.options;
        ok += e.options_succeeded;
    }
    return options > 0 ? std::optional<double>(static_cast<double>(ok) / static_cast<double>(options)) : std::nullopt;
}

auto EpisodeWindow::milestone_rates() const -> std::vector<std::optional<double>> {
    std::vector<std::optional<double>> out(static_cast<std::size_t>(milestones_));
    if (items_.empty()) {
        return out;
    }
    for (int g = 0; g < milestones_; ++g) {
        double s = 0.0;
        for (const auto& e : items_) {
            s += e.achieved.at(static_cast<std::size_t>(g)) ? 1.0 : 0.0;
        }
        out[static_cast<std::size_t>(g)] = s / static_cast<double>(items_.size());
    }
    return out;
}

auto metric_columns(const std::vector<std::string>& milestones) -> std::vector<std::string> {
    std::vector<std::string> cols = {"step", "episodes", "success_rate", "episode_length", "subpolicy_success"};
    for (const auto& m : milestones) {
        cols.push_back("rate_" + m);
    }
    for (const char* c : {"mask_accuracy", "mask_impact", "pruning", "overpruning", "underpruning", "filter_margin",
                          "tn_accuracy", "fn_accuracy", "false_negative_pct", "flagged_pct", "controller_loss",
                          "meta_loss", "contrastive_loss", "classifier_loss", "eps_controller", "eps_meta",
                          "eps_affordance"}) {
        cols.emplace_back(c);
    }
    return cols;
}

void write_metric_header(std::ostream& out, const std::vector<std::string>& milestones) {
    out << kMetricsVersionLine << '\n';
    const auto cols = metric_columns(milestones);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << (i ? "," : "") << cols[i];
    }
    out << '\n';
}

void write_metric_row(std::ostream& out, const MetricRow& row) {
    std::vector<std::string> cells = {std::to_string(row.step), std::to_string(row.episodes), cell(row.success_rate),
                                      cell(row.episode_length), cell(row.subpolicy_success)};
    for (const auto& r : row.milestone_rates) {
        cells.push_back(cell(r));
    }
    const auto mask_field = [&row](double MaskMetrics::*field) {
        return row.mask ? cell((*row.mask).*field) : std::string();
    };
    cells.push_back(mask_field(&MaskMetrics::accuracy));
    cells.push_back(cell(row.mask_impact));
    cells.push_back(mask_field(&MaskMetrics::pruning));
    cells.push_back(mask_field(&MaskMetrics::overpruning));
    cells.push_back(mask_field(&MaskMetrics::underpruning));
    cells.push_back(cell(row.filter.margin));
    cells.push_back(cell(row.filter.true_negative_accuracy));
    cells.push_back(cell(row.filter.false_negative_accuracy));
    cells.push_back(cell(row.filter.false_negative_pct));
    cells.push_back(cell(row.filter.flagged_pct));
    cells.push_back(cell(row.controller_loss));
    cells.push_back(cell(row.meta_loss));
    cells.push_back(cell(row.contrastive_loss));
    cells.push_back(cell(row.classifier_loss));
    cells.push_back(cell(row.eps_controller));
    cells.push_back(cell(row.eps_meta));
    cells.push_back(cell(row.eps_affordance));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out << (i ? "," : "") << cells[i];
    }
    out << '\n';
}

auto MetricTable::column(const std::string& name) const -> int {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

auto read_metric_table(std::istream& in, const std::string& source) -> MetricTable {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(source + ": empty metric file");
    }
    if (line.rfind("# hal-metrics ", 0) != 0) {
        throw Error(source + ": missing metric version line");
    }
    if (line != kMetricsVersionLine) {
        throw Error(source + ": unsupported metric version '" + line.substr(14) + "'");
    }
    MetricTable t;
    if (!std::getline(in, line)) {
        throw Error(source + ": missing column header");
    }
    t.columns = split(line, ',');
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        auto fields = split(line, ',');
        if (fields.size() != t.columns.size()) {
            throw Error(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) +
                        " fields");
        }
        std::vector<std::optional<double>> row;
        for (const auto& f : fields) {
            if (f.empty()) {
                row.emplace_back();
                continue;
            }
            try {
                row.emplace_back(std::stod(f));
            } catch (const std::exception&) {
                throw Error(source + ":" + std::to_string(lineno) + ": bad number '" + f + "'");
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

}    // namespace hal::trainer
