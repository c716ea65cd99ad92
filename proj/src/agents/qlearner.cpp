#include "hal/agents/qlearner.hpp"

#include "hal/agents/variant.hpp"
#include "hal/approx/encoding.hpp"
#include "hal/approx/losses.hpp"
#include "hal/common/error.hpp"

namespace hal::agents {

ObservationEncoder::ObservationEncoder(int view_size, int channels, int inventory)
    : view_size_(view_size), channels_(channels), inventory_(inventory) {}

auto ObservationEncoder::for_task(const grid::TaskSpec& task) -> ObservationEncoder {
    return {task.view_size, grid::channel_count(task.kind), static_cast<int>(grid::item_names(task.kind).size())};
}

void ObservationEncoder::encode(const grid::Observation& obs, float* column) const {
    approx::encode_view<float>(obs.view, obs.inventory, channels_, column, input_size());
}

auto ObservationEncoder::encode(const grid::Observation& obs) const -> Matrix<float> {
    Matrix<float> x(input_size(), 1);
    encode(obs, x.data());
    return x;
}

auto ObservationEncoder::encode(std::span<const grid::Observation* const> batch) const -> Matrix<float> {
    Matrix<float> x(input_size(), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t b = 0; b < batch.size(); ++b) {
        encode(*batch[b], x.col(static_cast<Eigen::Index>(b)).data());
    }
    return x;
}

auto ObservationEncoder::net_config(std::vector<int> conv, std::vector<int> hidden, int heads, int width, bool dueling) const
    -> approx::NetConfig {
    approx::NetConfig c;
    c.grid_h = view_size_;
    c.grid_w = view_size_;
    c.grid_c = channels_;
    c.extra = inventory_;
    c.conv = std::move(conv);
    c.hidden = std::move(hidden);
    c.heads = heads;
    c.width = width;
    c.dueling = dueling;
    return c;
}

QLearner::QLearner(ObservationEncoder encoder, approx::NetConfig net, approx::AdamConfig adam, std::uint64_t seed)
    : encoder_(encoder), online_(net, seed), target_(net, seed), adam_(adam, online_.param_count()), width_(net.width) {
    if (net.input_size() != encoder_.input_size()) {
        throw ShapeError("QLearner: network input does not match the observation encoding");
    }
}

auto QLearner::q_values(const grid::Observation& obs) const -> std::vector<float> {
    const Matrix<float> q = online_.predict(encoder_.encode(obs));
    return {q.data(), q.data() + q.size()};
}

auto QLearner::head_values(const grid::Observation& obs, int head) const -> std::vector<float> {
    const auto all = q_values(obs);
    const auto off = static_cast<std::size_t>(head * width_);
    if (off + static_cast<std::size_t>(width_) > all.size()) {
        throw ShapeError("QLearner: head index out of range");
    }
    return {all.begin() + static_cast<long>(off), all.begin() + static_cast<long>(off) + width_};
}

auto QLearner::controller_targets(std::span<const replay::Transition* const> batch) const -> std::vector<double> {
    std::vector<const grid::Observation*> next;
    next.reserve(batch.size());
    for (const auto* t : batch) {
        next.push_back(t->next_obs.get());
    }
    const Matrix<float> x = encoder_.encode(next);
    const Matrix<float> q_online = online_.predict(x);
    const Matrix<float> q_target = target_.predict(x);
    std::vector<double> y(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto* t = batch[b];
        const auto col = static_cast<Eigen::Index>(b);
        y[b] = t->reward;
        if (t->discount > 0.0) {
            const Eigen::Index off = static_cast<Eigen::Index>(t->goal) * width_;
            const std::span<const float> head(q_online.col(col).data() + off, static_cast<std::size_t>(width_));
            const int best = argmax(head);
            y[b] += t->discount * static_cast<double>(q_target(off + best, col));
        }
    }
    return y;
}

auto QLearner::meta_targets(std::span<const replay::MetaTransition* const> batch, double gamma, bool gamma_power) const
    -> std::vector<double> {
    std::vector<const grid::Observation*> next;
    next.reserve(batch.size());
    for (const auto* t : batch) {
        next.push_back(t->next_obs.get());
    }
    const Matrix<float> q_target = target_.predict(encoder_.encode(next));
    std::vector<double> y(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto* t = batch[b];
        y[b] = t->reward_sum;
        if (!t->terminal) {
            const double scale = gamma_power ? std::pow(gamma, t->length) : 1.0;
            y[b] += scale * static_cast<double>(q_target.col(static_cast<Eigen::Index>(b)).maxCoeff());
        }
    }
    return y;
}

auto QLearner::apply(const Matrix<float>& x, const std::vector<int>& index, const std::vector<double>& y,
                     std::span<const double> weights) -> UpdateResult {
    online_.zero_grad();
    UpdateResult out;
    const std::vector<double> w(weights.begin(), weights.end());
    const auto loss = approx::selected_squared_error<float>(online_.forward(x), index, y, w, &out.td_errors);
    if (!std::isfinite(loss.value)) {
        throw NonFiniteError("Q update: non-finite loss");
    }
    online_.backward(loss.grad);
    adam_.step(online_);
    out.loss = loss.value;
    return out;
}

auto QLearner::controller_update(std::span<const replay::Transition* const> batch, std::span<const double> weights)
    -> UpdateResult {
    const auto y = controller_targets(batch);
    std::vector<const grid::Observation*> obs;
    std::vector<int> index;
    for (const auto* t : batch) {
        obs.push_back(t->obs.get());
        index.push_back(t->goal * width_ + t->action);
    }
    return apply(encoder_.encode(obs), index, y, weights);
}

auto QLearner::meta_update(std::span<const replay::MetaTransition* const> batch, std::span<const double> weights,
                           double gamma, bool gamma_power) -> UpdateResult {
    const auto y = meta_targets(batch, gamma, gamma_power);
    std::vector<const grid::Observation*> obs;
    std::vector<int> index;
    for (const auto* t : batch) {
        obs.push_back(t->obs.get());
        index.push_back(t->goal);
    }
    return apply(encoder_.encode(obs), index, y, weights);
}

}    // namespace hal::agents
