#include "hal/approx/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace hal::approx {

auto gradient_check(Network<double>& net, const LossFn& loss, double tol, double h, double floor) -> GradCheckReport {
    GradCheckReport report;
    net.zero_grad();
    const LossEval base = loss(net, true);
    if (base.at_kink) {
        report.non_differentiable = true;
        return report;
    }
    const Vector<double> analytic = net.grads();
    auto& params = net.params();
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const LossEval plus = loss(net, false);
        params[i] = saved - h;
        const LossEval minus = loss(net, false);
        params[i] = saved;
        if (plus.at_kink || minus.at_kink) {
            ++report.skipped;
            continue;
        }
        const double numeric = (plus.value - minus.value) / (2.0 * h);
        const double rel = std::abs(analytic[i] - numeric) / std::max(std::abs(analytic[i]) + std::abs(numeric), floor);
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_index = i;
        }
        ++report.checked;
    }
    report.passed = report.checked > 0 && report.max_rel_error < tol;
    return report;
}

}    // namespace hal::approx
