#include "hal/affordance/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/normal.hpp>

#include "hal/common/error.hpp"

namespace hal::affordance {

auto tolerance_factor(int m, double percentile, double confidence) -> double {
    if (m < 2) {
        throw InsufficientDataError("tolerance_factor: need at least two samples");
    }
    const double z = boost::math::quantile(boost::math::normal(), percentile);
    const double root = std::sqrt(static_cast<double>(m));
    const boost::math::non_central_t dist(static_cast<double>(m - 1), z * root);
    return boost::math::quantile(dist, confidence) / root;
}

auto fit_filter_margin(std::span<const double> scores, double percentile, double confidence, bool tolerance)
    -> FilterMargin {
    if (scores.size() < 10) {
        throw InsufficientDataError("fit_filter_margin: need at least 10 reference scores");
    }
    FilterMargin f;
    f.samples = static_cast<int>(scores.size());
    f.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    double ss = 0.0;
    for (const double s : scores) {
        ss += (s - f.mean) * (s - f.mean);
    }
    f.stddev = std::max(std::sqrt(ss / static_cast<double>(scores.size() - 1)), 1e-6);
    f.factor = tolerance ? tolerance_factor(f.samples, percentile, confidence)
                         : boost::math::quantile(boost::math::normal(), percentile);
    f.rho = f.mean + f.factor * f.stddev;
    return f;
}

auto knn_distances(const Matrix<float>& queries, const Matrix<float>& population, int k) -> std::vector<double> {
    if (queries.rows() != population.rows()) {
        throw ShapeError("knn_distances: dimension mismatch");
    }
    if (k < 1 || k > population.cols()) {
        throw InsufficientDataError("knn_distances: need at least k population points");
    }
    std::vector<double> out(static_cast<std::size_t>(queries.cols()));
    std::vector<double> d(static_cast<std::size_t>(population.cols()));
    for (Eigen::Index q = 0; q < queries.cols(); ++q) {
        const Eigen::RowVectorXf dist = (population.colwise() - queries.col(q)).colwise().norm();
        for (Eigen::Index i = 0; i < population.cols(); ++i) {
            d[static_cast<std::size_t>(i)] = dist[i];
        }
        std::partial_sort(d.begin(), d.begin() + k, d.end());
        out[static_cast<std::size_t>(q)] = std::accumulate(d.begin(), d.begin() + k, 0.0) / k;
    }
    return out;
}

auto filter_negatives(const Matrix<float>& candidates, const Matrix<float>& population, int k, double rho) -> FilterResult {
    FilterResult r;
    r.scores = knn_distances(candidates, population, k);
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
        (r.scores[i] < rho ? r.flagged : r.kept).push_back(static_cast<int>(i));
    }
    return r;
}

}    // namespace hal::affordance
