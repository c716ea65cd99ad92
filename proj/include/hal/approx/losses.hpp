// File: losses.hpp
// Description: Scalar loss kernels returning value and gradient with respect
// to the network output they consume

#pragma once

#include <vector>

#include "hal/approx/network.hpp"

namespace hal::approx {

template <typename S>
struct LossResult {
    double value = 0.0;
    Matrix<S> grad;             // same shape as the consumed output
    bool at_kink = false;       // some sample sits on a hinge boundary
};

// mean_b w_b * (q[index_b, b] - target_b)^2. Targets are constants.
// `td_errors` receives q - target per column when non-null.
template <typename S>
auto selected_squared_error(const Matrix<S>& q, const std::vector<int>& index, const std::vector<double>& target,
                            const std::vector<double>& weight, std::vector<double>* td_errors = nullptr)
    -> LossResult<S>;

// Triplet loss mean_b [|a-p|^2 - |a-n|^2 + margin]_+ on D x B embeddings.
// grad holds [d_anchor | d_positive | d_negative] stacked column-wise (D x 3B).
template <typename S>
auto triplet_loss(const Matrix<S>& anchor, const Matrix<S>& positive, const Matrix<S>& negative, double margin,
                  double kink_tol = 1e-7) -> LossResult<S>;

// Masked mean binary cross-entropy on logits.
template <typename S>
auto bce_with_logits(const Matrix<S>& logits, const Matrix<S>& target, const Matrix<S>& mask) -> LossResult<S>;

}    // namespace hal::approx
