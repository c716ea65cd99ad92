// File: metrics.hpp
// Description: Episode statistics, mask and filter quality metrics, and the
// versioned metric CSV

#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hal/affordance/model.hpp"
#include "hal/gridworld/types.hpp"

namespace hal::trainer {

// Percentages in [0, 100] over the K mask bits of one decision.
struct MaskMetrics {
    double accuracy = 0.0;
    double pruning = 0.0;
    double overpruning = 0.0;     // afforded but pruned
    double underpruning = 0.0;    // unafforded but kept
    bool impact = false;          // unmasked argmax falls outside the mask
};

auto compute_mask_metrics(const grid::AffordanceMask& mask, const grid::AffordanceVector& oracle,
                          std::span<const float> meta_q) -> MaskMetrics;

class MaskAccumulator {
public:
    void add(const MaskMetrics& m);
    void reset() { *this = MaskAccumulator{}; }
    [[nodiscard]] auto count() const -> std::uint64_t { return n_; }
    // Means over the window; nullopt when empty.
    [[nodiscard]] auto mean() const -> std::optional<MaskMetrics>;
    [[nodiscard]] auto impact_rate() const -> std::optional<double>;

private:
    std::uint64_t n_ = 0;
    std::uint64_t impact_ = 0;
    double accuracy_ = 0.0;
    double pruning_ = 0.0;
    double over_ = 0.0;
    double under_ = 0.0;
};

struct FilterMetrics {
    std::optional<double> margin;                // mean fitted rho over heads with a margin
    std::optional<double> true_negative_accuracy;
    std::optional<double> false_negative_accuracy;
    std::optional<double> false_negative_pct;
    std::optional<double> flagged_pct;
};

auto filter_metrics(const affordance::FilterStats& stats, const affordance::AffordanceModel* model) -> FilterMetrics;

struct EpisodeStats {
    bool success = false;
    int length = 0;
    std::vector<bool> achieved;    // per milestone
    int options = 0;
    int options_succeeded = 0;

    [[nodiscard]] auto subpolicy_success() const -> std::optional<double> {
        return options > 0 ? std::optional<double>(static_cast<double>(options_succeeded) / options) : std::nullopt;
    }
};

// Moving window over the most recent episodes.
class EpisodeWindow {
public:
    explicit EpisodeWindow(std::size_t capacity = 100, int milestones = 0) : capacity_(capacity), milestones_(milestones) {}
    void push(EpisodeStats e);
    [[nodiscard]] auto size() const -> std::size_t { return items_.size(); }
    [[nodiscard]] auto success_rate() const -> std::optional<double>;
    [[nodiscard]] auto mean_length() const -> std::optional<double>;
    // Options pooled over the window.
    [[nodiscard]] auto subpolicy_success() const -> std::optional<double>;
    [[nodiscard]] auto milestone_rates() const -> std::vector<std::optional<double>>;

private:
    std::size_t capacity_;
    int milestones_;
    std::deque<EpisodeStats> items_;
};

struct MetricRow {
    std::int64_t step = 0;
    std::int64_t episodes = 0;
    std::optional<double> success_rate;
    std::optional<double> episode_length;
    std::optional<double> subpolicy_success;
    std::vector<std::optional<double>> milestone_rates;
    std::optional<MaskMetrics> mask;
    std::optional<double> mask_impact;
    FilterMetrics filter;
    std::optional<double> controller_loss;
    std::optional<double> meta_loss;
    std::optional<double> contrastive_loss;
    std::optional<double> classifier_loss;
    double eps_controller = 0.0;
    double eps_meta = 0.0;
    double eps_affordance = 0.0;
};

inline constexpr const char* kMetricsVersionLine = "# hal-metrics v1";

auto metric_columns(const std::vector<std::string>& milestones) -> std::vector<std::string>;
void write_metric_header(std::ostream& out, const std::vector<std::string>& milestones);
void write_metric_row(std::ostream& out, const MetricRow& row);

// Parsed metric CSV: column names and rows of optional values. Rejects files
// without the version line or with an unknown version.
struct MetricTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;

    [[nodiscard]] auto column(const std::string& name) const -> int;
};

auto read_metric_table(std::istream& in, const std::string& source = "<metrics>") -> MetricTable;

}    // namespace hal::trainer
