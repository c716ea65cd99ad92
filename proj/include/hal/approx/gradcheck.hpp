// File: gradcheck.hpp
// Description: Central finite-difference verification of analytic parameter gradients

#pragma once

#include <functional>

#include "hal/approx/network.hpp"

namespace hal::approx {

struct LossEval {
    double value = 0.0;
    bool at_kink = false;
};

// Evaluates the scalar loss at the network's current parameters. When
// `compute_grad` is set it must also leave d loss / d params in net.grads().
using LossFn = std::function<LossEval(Network<double>& net, bool compute_grad)>;

struct GradCheckReport {
    double max_rel_error = 0.0;
    Eigen::Index worst_index = -1;
    int checked = 0;
    int skipped = 0;          // parameters whose perturbation touched a kink
    bool non_differentiable = false;    // the base point itself is on a kink
    bool passed = false;
};

// rel = |analytic - numeric| / max(|analytic| + |numeric|, floor)
auto gradient_check(Network<double>& net, const LossFn& loss, double tol, double h = 1e-6, double floor = 1e-5)
    -> GradCheckReport;

}    // namespace hal::approx
