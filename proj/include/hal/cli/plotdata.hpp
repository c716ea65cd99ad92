// File: plotdata.hpp
// Description: Cross-seed aggregation of metric logs into mean and normal
// 95% confidence bands per logged step

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hal/trainer/metrics.hpp"

namespace hal::cli {

struct AggregateRow {
    std::int64_t step = 0;
    int n = 0;
    double mean = 0.0;
    std::optional<double> ci_low;    // empty with fewer than two seeds
    std::optional<double> ci_high;
};

inline constexpr double kNormal95 = 1.96;

// Rows sharing a step are pooled across tables; missing cells are skipped.
auto aggregate_metric(const std::vector<trainer::MetricTable>& tables, const std::string& metric)
    -> std::vector<AggregateRow>;

void write_aggregate(std::ostream& out, const std::string& metric, const std::vector<AggregateRow>& rows);

// Files matching a shell glob; directories resolve to their metrics.csv.
auto resolve_metric_files(const std::string& pattern) -> std::vector<std::string>;

}    // namespace hal::cli
