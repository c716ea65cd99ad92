#include "hal/approx/losses.hpp"

#include <cmath>

#include "hal/common/error.hpp"

namespace hal::approx {

template <typename S>
auto selected_squared_error(const Matrix<S>& q, const std::vector<int>& index, const std::vector<double>& target,
                            const std::vector<double>& weight, std::vector<double>* td_errors) -> LossResult<S> {
    const auto batch = static_cast<std::size_t>(q.cols());
    if (index.size() != batch || target.size() != batch || (!weight.empty() && weight.size() != batch)) {
        throw ShapeError("selected_squared_error: batch size mismatch");
    }
    LossResult<S> out;
    out.grad = Matrix<S>::Zero(q.rows(), q.cols());
    if (td_errors) {
        td_errors->assign(batch, 0.0);
    }
    if (batch == 0) {
        return out;
    }
    const double inv = 1.0 / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        if (index[b] < 0 || index[b] >= q.rows()) {
            throw ShapeError("selected_squared_error: index out of range");
        }
        const auto col = static_cast<Eigen::Index>(b);
        const double w = weight.empty() ? 1.0 : weight[b];
        const double err = static_cast<double>(q(index[b], col)) - target[b];
        out.value += w * err * err * inv;
        out.grad(index[b], col) = static_cast<S>(2.0 * w * err * inv);
        if (td_errors) {
            (*td_errors)[b] = err;
        }
    }
    return out;
}

template <typename S>
auto triplet_loss(const Matrix<S>& anchor, const Matrix<S>& positive, const Matrix<S>& negative, double margin,
                  double kink_tol) -> LossResult<S> {
    if (positive.rows() != anchor.rows() || negative.rows() != anchor.rows() || positive.cols() != anchor.cols() ||
        negative.cols() != anchor.cols()) {
        throw ShapeError("triplet_loss: embedding shapes differ");
    }
    const Eigen::Index batch = anchor.cols();
    const Eigen::Index d = anchor.rows();
    LossResult<S> out;
    out.grad = Matrix<S>::Zero(d, 3 * batch);
    if (batch == 0) {
        return out;
    }
    const double inv = 1.0 / static_cast<double>(batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto ap = (anchor.col(b) - positive.col(b)).template cast<double>();
        const auto an = (anchor.col(b) - negative.col(b)).template cast<double>();
        const double inner = ap.squaredNorm() - an.squaredNorm() + margin;
        if (std::abs(inner) <= kink_tol) {
            out.at_kink = true;
        }
        if (inner <= 0.0) {
            continue;
        }
        out.value += inner * inv;
        // d/da = 2(a-p) - 2(a-n) = 2(n-p)
        out.grad.col(b) = (2.0 * inv * (ap - an)).template cast<S>();
        out.grad.col(batch + b) = (-2.0 * inv * ap).template cast<S>();
        out.grad.col(2 * batch + b) = (2.0 * inv * an).template cast<S>();
    }
    return out;
}

template <typename S>
auto bce_with_logits(const Matrix<S>& logits, const Matrix<S>& target, const Matrix<S>& mask) -> LossResult<S> {
    if (target.rows() != logits.rows() || target.cols() != logits.cols() || mask.rows() != logits.rows() ||
        mask.cols() != logits.cols()) {
        throw ShapeError("bce_with_logits: shape mismatch");
    }
    LossResult<S> out;
    out.grad = Matrix<S>::Zero(logits.rows(), logits.cols());
    const double total = static_cast<double>(mask.sum());
    if (total <= 0.0) {
        return out;
    }
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            const double m = static_cast<double>(mask(i, j));
            if (m == 0.0) {
                continue;
            }
            const double x = static_cast<double>(logits(i, j));
            const double y = static_cast<double>(target(i, j));
            // log(1 + e^x) - y x, computed stably
            const double softplus = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
            out.value += m * (softplus - y * x) / total;
            const double sig = 1.0 / (1.0 + std::exp(-x));
            out.grad(i, j) = static_cast<S>(m * (sig - y) / total);
        }
    }
    return out;
}

#define HAL_LOSS_INSTANTIATE(S)                                                                                      \
    template auto selected_squared_error<S>(const Matrix<S>&, const std::vector<int>&, const std::vector<double>&,   \
                                            const std::vector<double>&, std::vector<double>*) -> LossResult<S>;       \
    template auto triplet_loss<S>(const Matrix<S>&, const Matrix<S>&, const Matrix<S>&, double, double)              \
        -> LossResult<S>;                                                                                             \
    template auto bce_with_logits<S>(const Matrix<S>&, const Matrix<S>&, const Matrix<S>&) -> LossResult<S>;

HAL_LOSS_INSTANTIATE(float)
HAL_LOSS_INSTANTIATE(double)

}    // namespace hal::approx
