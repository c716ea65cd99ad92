// File: plotdata.cpp
// Description: Cross-seed metric aggregation

#include "hal/cli/plotdata.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>

#include "hal/common/error.hpp"

namespace hal::cli {

auto aggregate_metric(const std::vector<trainer::MetricTable>& tables, const std::string& metric)
    -> std::vector<AggregateRow> {
    std::map<std::int64_t, std::vector<double>> by_step;
    for (const auto& t : tables) {
        const int step_col = t.column("step");
        const int col = t.column(metric);
        if (col < 0) {
            throw ConfigError("metric", "unknown metric column '" + metric + "'");
        }
        for (const auto& row : t.rows) {
            const auto& step = row[static_cast<std::size_t>(step_col)];
            const auto& v = row[static_cast<std::size_t>(col)];
            if (step && v) {
                by_step[static_cast<std::int64_t>(*step)].push_back(*v);
            }
        }
    }
    std::vector<AggregateRow> out;
    for (const auto& [step, values] : by_step) {
        AggregateRow r;
        r.step = step;
        r.n = static_cast<int>(values.size());
        double sum = 0.0;
        for (double v : values) {
            sum += v;
        }
        r.mean = sum / r.n;
        if (r.n >= 2) {
            double ss = 0.0;
            for (double v : values) {
                ss += (v - r.mean) * (v - r.mean);
            }
            const double half = kNormal95 * std::sqrt(ss / (r.n - 1)) / std::sqrt(static_cast<double>(r.n));
            r.ci_low = r.mean - half;
            r.ci_high = r.mean + half;
        }
        out.push_back(r);
    }
    return out;
}

void write_aggregate(std::ostream& out, const std::string& metric, const std::vector<AggregateRow>& rows) {
    out << "step,n," << metric << "_mean," << metric << "_ci_low," << metric << "_ci_high\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        out << r.step << ',' << r.n << ',' << num(r.mean) << ',' << (r.ci_low ? num(*r.ci_low) : "") << ','
            << (r.ci_high ? num(*r.ci_high) : "") << '\n';
    }
}

auto resolve_metric_files(const std::string& pattern) -> std::vector<std::string> {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    std::vector<std::string> files;
    if (rc == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) {
            std::filesystem::path p(g.gl_pathv[i]);
            if (std::filesystem::is_directory(p)) {
                p /= "metrics.csv";
            }
            if (std::filesystem::is_regular_file(p)) {
                files.push_back(p.string());
            }
        }
    }
    globfree(&g);
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw Error("no metric logs match '" + pattern + "'");
    }
    return files;
}

}    // namespace hal::cli
