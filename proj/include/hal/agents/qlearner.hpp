// File: qlearner.hpp
// Description: Observation encoder and the Q-learning bundle (online and
// target network, Adam) with the controller and meta TD losses

#pragma once

#include <span>
#include <vector>

#include "hal/approx/network.hpp"
#include "hal/approx/optim.hpp"
#include "hal/gridworld/world.hpp"
#include "hal/replay/transitions.hpp"

namespace hal::agents {

using approx::Matrix;

class ObservationEncoder {
public:
    ObservationEncoder() = default;
    ObservationEncoder(int view_size, int channels, int inventory);
    static auto for_task(const grid::TaskSpec& task) -> ObservationEncoder;

    [[nodiscard]] auto input_size() const -> int { return view_size_ * view_size_ * channels_ + inventory_; }
    void encode(const grid::Observation& obs, float* column) const;
    [[nodiscard]] auto encode(const grid::Observation& obs) const -> Matrix<float>;
    [[nodiscard]] auto encode(std::span<const grid::Observation* const> batch) const -> Matrix<float>;
    // Network shape for this input with the given body and head.
    [[nodiscard]] auto net_config(std::vector<int> conv, std::vector<int> hidden, int heads, int width, bool dueling) const
        -> approx::NetConfig;

private:
    int view_size_ = 0;
    int channels_ = 0;
    int inventory_ = 0;
};

struct UpdateResult {
    double loss = 0.0;
    std::vector<double> td_errors;
};

// Output layout for goal-conditioned nets: head g occupies rows [g*A, (g+1)*A).
class QLearner {
public:
    QLearner() = default;
    QLearner(ObservationEncoder encoder, approx::NetConfig net, approx::AdamConfig adam, std::uint64_t seed);

    [[nodiscard]] auto q_values(const grid::Observation& obs) const -> std::vector<float>;
    [[nodiscard]] auto head_values(const grid::Observation& obs, int head) const -> std::vector<float>;

    // Double-Q n-step loss: y = r + discount * Qbar(s', argmax_a Q(s', a; g); g).
    auto controller_update(std::span<const replay::Transition* const> batch, std::span<const double> weights) -> UpdateResult;
    // y = r_sum + [not terminal] gamma^N * max_g' Qbar(s_N, g'); `gamma_power`
    // false drops the gamma^N factor.
    auto meta_update(std::span<const replay::MetaTransition* const> batch, std::span<const double> weights, double gamma,
                     bool gamma_power = true) -> UpdateResult;

    // Losses and targets without touching parameters (for tests and logs).
    [[nodiscard]] auto controller_targets(std::span<const replay::Transition* const> batch) const -> std::vector<double>;
    [[nodiscard]] auto meta_targets(std::span<const replay::MetaTransition* const> batch, double gamma, bool gamma_power) const
        -> std::vector<double>;

    void sync_target() { approx::sync_target(online_, target_); }

    [[nodiscard]] auto online() -> approx::Network<float>& { return online_; }
    [[nodiscard]] auto online() const -> const approx::Network<float>& { return online_; }
    [[nodiscard]] auto target() -> approx::Network<float>& { return target_; }
    [[nodiscard]] auto target() const -> const approx::Network<float>& { return target_; }
    [[nodiscard]] auto optimizer() -> approx::Adam<float>& { return adam_; }
    [[nodiscard]] auto optimizer() const -> const approx::Adam<float>& { return adam_; }
    [[nodiscard]] auto encoder() const -> const ObservationEncoder& { return encoder_; }
    [[nodiscard]] auto updates() const -> std::uint64_t { return adam_.steps(); }

private:
    auto apply(const Matrix<float>& x, const std::vector<int>& index, const std::vector<double>& y,
               std::span<const double> weights) -> UpdateResult;

    ObservationEncoder encoder_;
    approx::Network<float> online_;
    approx::Network<float> target_;
    approx::Adam<float> adam_;
    int width_ = 1;
};

}    // namespace hal::agents
