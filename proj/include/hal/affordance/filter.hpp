// File: filter.hpp
// Description: k-NN distance scores, Gaussian tolerance-limit margins and
// false-negative filtering of candidate negatives

#pragma once

#include <span>
#include <vector>

#include "hal/approx/network.hpp"

namespace hal::affordance {

using approx::Matrix;

// One-sided normal tolerance factor: k = t'_{conf}(m-1, z_p sqrt(m)) / sqrt(m).
auto tolerance_factor(int m, double percentile, double confidence) -> double;

struct FilterMargin {
    double rho = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    int samples = 0;
    double factor = 0.0;
};

// Requires at least 10 scores. `tolerance` false uses rho = mean + z_p * sd.
auto fit_filter_margin(std::span<const double> scores, double percentile, double confidence, bool tolerance = true)
    -> FilterMargin;

// Mean Euclidean distance from each query column to its k nearest population columns.
auto knn_distances(const Matrix<float>& queries, const Matrix<float>& population, int k) -> std::vector<double>;

struct FilterResult {
    std::vector<int> kept;
    std::vector<int> flagged;
    std::vector<double> scores;
};

// Candidates scoring below rho are flagged as false negatives.
auto filter_negatives(const Matrix<float>& candidates, const Matrix<float>& population, int k, double rho) -> FilterResult;

}    // namespace hal::affordance
