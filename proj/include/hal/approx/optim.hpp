// File: optim.hpp
// Description: Adam with bias correction over a network's flat parameter buffer

#pragma once

#include <cstdint>
#include <string>

#include "hal/approx/network.hpp"

namespace hal::approx {

struct AdamConfig {
    double lr = 0.000625;
    double eps = 0.00015;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double clip_norm = 0.0;    // <= 0 disables global-norm clipping
};

template <typename S>
class Adam {
public:
    Adam() = default;
    Adam(AdamConfig config, Eigen::Index size);

    // Applies one update from `grads`. A non-finite gradient leaves params,
    // moments and the step counter untouched and throws NonFiniteError.
    void step(Vector<S>& params, const Vector<S>& grads);
    void step(Network<S>& net) { step(net.params(), net.grads()); }

    [[nodiscard]] auto config() const -> const AdamConfig& { return config_; }
    [[nodiscard]] auto steps() const -> std::uint64_t { return t_; }
    [[nodiscard]] auto first_moment() const -> const Vector<S>& { return m_; }
    [[nodiscard]] auto second_moment() const -> const Vector<S>& { return v_; }
    void set_lr(double lr) { config_.lr = lr; }

    [[nodiscard]] auto serialize() const -> std::string;
    static auto deserialize(const std::string& blob) -> Adam;

private:
    AdamConfig config_;
    Vector<S> m_;
    Vector<S> v_;
    std::uint64_t t_ = 0;
};

// Target-network synchronisation: hard copy, shapes must match.
template <typename S>
void sync_target(const Network<S>& online, Network<S>& target) {
    target.copy_params_from(online);
}

extern template class Adam<float>;
extern template class Adam<double>;

}    // namespace hal::approx
