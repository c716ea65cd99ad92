// File: network.hpp
// Description: Small feed-forward networks over egocentric grids: 3x3 same-
// padded convolutions, dense ReLU layers and a multi-head (optionally
// dueling) linear output, with flat parameter and gradient buffers

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hal::approx {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Input layout per column: grid_h * grid_w * grid_c one-hot values (HWC),
// followed by `extra` dense features. With no grid the input is `extra` wide.
struct NetConfig {
    int grid_h = 0;
    int grid_w = 0;
    int grid_c = 0;
    int extra = 0;
    std::vector<int> conv;      // output channels per conv layer
    std::vector<int> hidden;    // dense ReLU widths
    int heads = 1;
    int width = 1;              // outputs per head (actions)
    bool dueling = false;

    [[nodiscard]] auto input_size() const -> int { return grid_h * grid_w * grid_c + extra; }
    [[nodiscard]] auto output_size() const -> int { return heads * width; }
    [[nodiscard]] auto describe() const -> std::string;
    static auto parse(const std::string& text) -> NetConfig;
    auto operator==(const NetConfig&) const -> bool = default;
};

template <typename S>
class Network {
public:
    Network() = default;
    Network(NetConfig config, std::uint64_t seed);

    // Output: output_size() x batch. Caches activations for backward().
    auto forward(const Matrix<S>& input) -> const Matrix<S>&;
    // Accumulates parameter gradients for the last forward() and returns the
    // gradient with respect to the input (empty unless requested).
    auto backward(const Matrix<S>& d_output, bool want_input_grad = false) -> Matrix<S>;
    // Pure evaluation without touching caches.
    [[nodiscard]] auto predict(const Matrix<S>& input) const -> Matrix<S>;

    void zero_grad() { grads_.setZero(); }
    [[nodiscard]] auto params() -> Vector<S>& { return params_; }
    [[nodiscard]] auto params() const -> const Vector<S>& { return params_; }
    [[nodiscard]] auto grads() -> Vector<S>& { return grads_; }
    [[nodiscard]] auto grads() const -> const Vector<S>& { return grads_; }
    [[nodiscard]] auto param_count() const -> Eigen::Index { return params_.size(); }
    [[nodiscard]] auto config() const -> const NetConfig& { return config_; }

    // Hard copy of parameters; shapes must match.
    void copy_params_from(const Network& other);

    [[nodiscard]] auto serialize() const -> std::string;
    static auto deserialize(const std::string& blob) -> Network;

    auto operator==(const Network& other) const -> bool {
        return config_ == other.config_ && params_ == other.params_;
    }

private:
    struct Layer {
        Eigen::Index w_offset = 0;
        Eigen::Index b_offset = 0;
        int rows = 0;    // outputs
        int cols = 0;    // inputs (9 * c_in for conv)
    };
    struct Cache {
        std::vector<Matrix<S>> conv_cols;    // im2col input per conv layer
        std::vector<Matrix<S>> conv_out;     // post-ReLU output per conv layer (channels x batch*hw)
        std::vector<Matrix<S>> dense_in;     // input to each dense layer, head last
        std::vector<Matrix<S>> dense_out;    // post-ReLU output per hidden layer
        Matrix<S> raw_head;
        Matrix<S> output;
        Eigen::Index batch = 0;
    };

    void build_layers();
    void run(const Matrix<S>& input, Cache& cache) const;
    // Samples are `stride` scalars apart in `data`; each holds h*w*channels values (HWC).
    void im2col(const S* data, Eigen::Index stride, int channels, Eigen::Index batch, Matrix<S>& cols) const;
    void col2im(const Matrix<S>& cols, int channels, Eigen::Index batch, S* data, Eigen::Index stride) const;

    NetConfig config_;
    std::vector<Layer> conv_;
    std::vector<Layer> dense_;    // hidden layers followed by the head
    Vector<S> params_;
    Vector<S> grads_;
    Cache cache_;
};

// Q = V + A - mean(A) per head. `raw` rows per head: [V, A_1..A_n].
template <typename S>
auto dueling_combine(const Matrix<S>& raw, int heads, int width) -> Matrix<S>;

extern template class Network<float>;
extern template class Network<double>;

}    // namespace hal::approx
