#include "hal/approx/network.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "hal/common/error.hpp"
#include "hal/common/keyvalue.hpp"
#include "hal/common/rng.hpp"

namespace hal::approx {

namespace {

auto join(const std::vector<int>& v) -> std::string {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + std::to_string(v[i]);
    }
    return out.empty() ? "-" : out;
}

auto parse_list(const std::string& s) -> std::vector<int> {
    std::vector<int> out;
    if (s == "-" || s.empty()) {
        return out;
    }
    for (const auto& part : split(s, ',')) {
        out.push_back(std::stoi(part));
    }
    return out;
}

}    // namespace

auto NetConfig::describe() const -> std::string {
    std::ostringstream out;
    out << "grid=" << grid_h << 'x' << grid_w << 'x' << grid_c << " extra=" << extra << " conv=" << join(conv)
        << " hidden=" << join(hidden) << " heads=" << heads << " width=" << width << " dueling=" << (dueling ? 1 : 0);
    return out.str();
}

auto NetConfig::parse(const std::string& text) -> NetConfig {
    NetConfig c;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("network", "bad descriptor token '" + tok + "'");
        }
        const auto key = tok.substr(0, eq);
        const auto val = tok.substr(eq + 1);
        if (key == "grid") {
            const auto dims = split(val, 'x');
            if (dims.size() != 3) {
                throw ConfigError("network.grid", "expected HxWxC");
            }
            c.grid_h = std::stoi(dims[0]);
            c.grid_w = std::stoi(dims[1]);
            c.grid_c = std::stoi(dims[2]);
        } else if (key == "extra") {
            c.extra = std::stoi(val);
        } else if (key == "conv") {
            c.conv = parse_list(val);
        } else if (key == "hidden") {
            c.hidden = parse_list(val);
        } else if (key == "heads") {
            c.heads = std::stoi(val);
        } else if (key == "width") {
            c.width = std::stoi(val);
        } else if (key == "dueling") {
            c.dueling = val == "1";
        } else {
            throw ConfigError("network", "unknown descriptor key '" + key + "'");
        }
    }
    return c;
}

template <typename S>
Network<S>::Network(NetConfig config, std::uint64_t seed) : config_(std::move(config)) {
    if (config_.input_size() <= 0 || config_.heads <= 0 || config_.width <= 0) {
        throw ShapeError("network: empty input or output");
    }
    if (!config_.conv.empty() && config_.grid_c <= 0) {
        throw ShapeError("network: convolutions need a grid input");
    }
    build_layers();
    Rng rng(seed);
    const auto init = [&](const Layer& l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.cols));
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(l.rows) * l.cols; ++i) {
            params_[l.w_offset + i] = static_cast<S>((2.0 * rng.uniform() - 1.0) * bound);
        }
        for (int i = 0; i < l.rows; ++i) {
            params_[l.b_offset + i] = static_cast<S>((2.0 * rng.uniform() - 1.0) * bound);
        }
    };
    for (const auto& l : conv_) {
        init(l);
    }
    for (const auto& l : dense_) {
        init(l);
    }
}

template <typename S>
void Network<S>::build_layers() {
    Eigen::Index offset = 0;
    const auto add = [&offset](int rows, int cols) {
        Layer l;
        l.rows = rows;
        l.cols = cols;
        l.w_offset = offset;
        offset += static_cast<Eigen::Index>(rows) * cols;
        l.b_offset = offset;
        offset += rows;
        return l;
    };
    conv_.clear();
    dense_.clear();
    int channels = config_.grid_c;
    for (const int out : config_.conv) {
        conv_.push_back(add(out, 9 * channels));
        channels = out;
    }
    const int hw = config_.grid_h * config_.grid_w;
    int width = config_.conv.empty() ? config_.input_size() : hw * channels + config_.extra;
    for (const int h : config_.hidden) {
        dense_.push_back(add(h, width));
        width = h;
    }
    const int head_rows = config_.heads * (config_.dueling ? config_.width + 1 : config_.width);
    dense_.push_back(add(head_rows, width));
    params_ = Vector<S>::Zero(offset);
    grads_ = Vector<S>::Zero(offset);
}

template <typename S>
void Network<S>::im2col(const S* data, Eigen::Index stride, int channels, Eigen::Index batch, Matrix<S>& cols) const {
    const int h = config_.grid_h;
    const int w = config_.grid_w;
    const int hw = h * w;
    cols.setZero(9 * channels, batch * hw);
    const auto bytes = sizeof(S) * static_cast<std::size_t>(channels);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const S* sample = data + b * stride;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                S* col = cols.data() + (b * hw + y * w + x) * 9 * channels;
                for (int dy = -1; dy <= 1; ++dy) {
                    const int yy = y + dy;
                    if (yy < 0 || yy >= h) {
                        continue;
                    }
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = x + dx;
                        if (xx >= 0 && xx < w) {
                            std::memcpy(col + ((dy + 1) * 3 + dx + 1) * channels, sample + (yy * w + xx) * channels, bytes);
                        }
                    }
                }
            }
        }
    }
}

template <typename S>
void Network<S>::col2im(const Matrix<S>& cols, int channels, Eigen::Index batch, S* data, Eigen::Index stride) const {
    const int h = config_.grid_h;
    const int w = config_.grid_w;
    const int hw = h * w;
    for (Eigen::Index b = 0; b < batch; ++b) {
        S* sample = data + b * stride;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const S* col = cols.data() + (b * hw + y * w + x) * 9 * channels;
                for (int dy = -1; dy <= 1; ++dy) {
                    const int yy = y + dy;
                    if (yy < 0 || yy >= h) {
                        continue;
                    }
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = x + dx;
                        if (xx < 0 || xx >= w) {
                            continue;
                        }
                        const S* src = col + ((dy + 1) * 3 + dx + 1) * channels;
                        S* dst = sample + (yy * w + xx) * channels;
                        for (int c = 0; c < channels; ++c) {
                            dst[c] += src[c];
                        }
                    }
                }
            }
        }
    }
}

template <typename S>
void Network<S>::run(const Matrix<S>& input, Cache& cache) const {
    if (input.rows() != config_.input_size()) {
        throw ShapeError("network: expected input of " + std::to_string(config_.input_size()) + " rows, got " + std::to_string(input.rows()));
    }
    const Eigen::Index batch = input.cols();
    cache.batch = batch;
    const int hw = config_.grid_h * config_.grid_w;
    cache.conv_cols.resize(conv_.size());
    cache.conv_out.resize(conv_.size());
    cache.dense_in.resize(dense_.size());
    cache.dense_out.resize(dense_.size() - 1);

    const S* src = input.data();
    Eigen::Index stride = input.rows();
    int channels = config_.grid_c;
    for (std::size_t i = 0; i < conv_.size(); ++i) {
        const Layer& l = conv_[i];
        im2col(src, stride, channels, batch, cache.conv_cols[i]);
        const Eigen::Map<const Matrix<S>> W(params_.data() + l.w_offset, l.rows, l.cols);
        const Eigen::Map<const Vector<S>> bias(params_.data() + l.b_offset, l.rows);
        auto& out = cache.conv_out[i];
        out.noalias() = W * cache.conv_cols[i];
        out.colwise() += bias;
        out = out.cwiseMax(S(0));
        src = out.data();
        channels = l.rows;
        stride = static_cast<Eigen::Index>(hw) * channels;
    }

    auto& first = cache.dense_in[0];
    if (conv_.empty()) {
        first = input;
    } else {
        const Eigen::Index flat = static_cast<Eigen::Index>(hw) * channels;
        first.resize(flat + config_.extra, batch);
        first.topRows(flat) = Eigen::Map<const Matrix<S>>(cache.conv_out.back().data(), flat, batch);
        if (config_.extra > 0) {
            first.bottomRows(config_.extra) = input.bottomRows(config_.extra);
        }
    }
    for (std::size_t i = 0; i < dense_.size(); ++i) {
        const Layer& l = dense_[i];
        const Eigen::Map<const Matrix<S>> W(params_.data() + l.w_offset, l.rows, l.cols);
        const Eigen::Map<const Vector<S>> bias(params_.data() + l.b_offset, l.rows);
        const bool last = i + 1 == dense_.size();
        auto& out = last ? cache.raw_head : cache.dense_out[i];
        out.noalias() = W * cache.dense_in[i];
        out.colwise() += bias;
        if (!last) {
            out = out.cwiseMax(S(0));
            cache.dense_in[i + 1] = out;
        }
    }
    if (config_.dueling) {
        cache.output = dueling_combine<S>(cache.raw_head, config_.heads, config_.width);
    } else {
        cache.output = cache.raw_head;
    }
}

template <typename S>
auto Network<S>::forward(const Matrix<S>& input) -> const Matrix<S>& {
    run(input, cache_);
    return cache_.output;
}

template <typename S>
auto Network<S>::predict(const Matrix<S>& input) const -> Matrix<S> {
    // scratch buffers reused across calls on this thread
    thread_local Cache cache;
    run(input, cache);
    return cache.output;
}

template <typename S>
auto Network<S>::backward(const Matrix<S>& d_output, bool want_input_grad) -> Matrix<S> {
    const Eigen::Index batch = cache_.batch;
    if (d_output.rows() != config_.output_size() || d_output.cols() != batch) {
        throw ShapeError("network: output gradient shape mismatch");
    }
    Matrix<S> d;
    if (config_.dueling) {
        const int a = config_.width;
        d.resize(config_.heads * (a + 1), batch);
        for (int h = 0; h < config_.heads; ++h) {
            const auto dq = d_output.middleRows(h * a, a);
            const Eigen::Matrix<S, 1, Eigen::Dynamic> sum = dq.colwise().sum();
            d.row(h * (a + 1)) = sum;
            d.middleRows(h * (a + 1) + 1, a) = dq.rowwise() - sum / static_cast<S>(a);
        }
    } else {
        d = d_output;
    }

    for (std::size_t i = dense_.size(); i-- > 0;) {
        const Layer& l = dense_[i];
        if (i + 1 < dense_.size()) {
            d = d.cwiseProduct((cache_.dense_out[i].array() > S(0)).template cast<S>().matrix());
        }
        Eigen::Map<Matrix<S>> dW(grads_.data() + l.w_offset, l.rows, l.cols);
        Eigen::Map<Vector<S>> db(grads_.data() + l.b_offset, l.rows);
        dW.noalias() += d * cache_.dense_in[i].transpose();
        db += d.rowwise().sum();
        const Eigen::Map<const Matrix<S>> W(params_.data() + l.w_offset, l.rows, l.cols);
        if (i > 0 || want_input_grad || !conv_.empty()) {
            Matrix<S> next = W.transpose() * d;
            d.swap(next);
        }
    }

    Matrix<S> d_input;
    if (want_input_grad) {
        d_input = Matrix<S>::Zero(config_.input_size(), batch);
    }
    if (conv_.empty()) {
        if (want_input_grad) {
            d_input = d;
        }
        return d_input;
    }

    const int hw = config_.grid_h * config_.grid_w;
    const Eigen::Index flat = static_cast<Eigen::Index>(hw) * conv_.back().rows;
    if (want_input_grad && config_.extra > 0) {
        d_input.bottomRows(config_.extra) = d.bottomRows(config_.extra);
    }
    // Back to channels x (batch*hw) layout.
    Matrix<S> dconv = Eigen::Map<const Matrix<S>>(Matrix<S>(d.topRows(flat)).data(), conv_.back().rows, batch * hw);
    for (std::size_t i = conv_.size(); i-- > 0;) {
        const Layer& l = conv_[i];
        dconv = dconv.cwiseProduct((cache_.conv_out[i].array() > S(0)).template cast<S>().matrix());
        Eigen::Map<Matrix<S>> dW(grads_.data() + l.w_offset, l.rows, l.cols);
        Eigen::Map<Vector<S>> db(grads_.data() + l.b_offset, l.rows);
        dW.noalias() += dconv * cache_.conv_cols[i].transpose();
        db += dconv.rowwise().sum();
        if (i == 0 && !want_input_grad) {
            break;
        }
        const Eigen::Map<const Matrix<S>> W(params_.data() + l.w_offset, l.rows, l.cols);
        const Matrix<S> dcols = W.transpose() * dconv;
        const int c_in = i == 0 ? config_.grid_c : conv_[i - 1].rows;
        if (i == 0) {
            col2im(dcols, c_in, batch, d_input.data(), d_input.rows());
        } else {
            Matrix<S> prev = Matrix<S>::Zero(c_in, batch * hw);
            col2im(dcols, c_in, batch, prev.data(), static_cast<Eigen::Index>(hw) * c_in);
            dconv.swap(prev);
        }
    }
    return d_input;
}

template <typename S>
void Network<S>::copy_params_from(const Network& other) {
    if (!(config_ == other.config_) || params_.size() != other.params_.size()) {
        throw ShapeError("network: cannot copy parameters between different architectures");
    }
    params_ = other.params_;
}

template <typename S>
auto Network<S>::serialize() const -> std::string {
    std::string out = "hal-net 1 " + std::to_string(sizeof(S)) + "\n" + config_.describe() + "\n";
    const auto n = static_cast<std::uint64_t>(params_.size());
    out.append(reinterpret_cast<const char*>(&n), sizeof(n));
    out.append(reinterpret_cast<const char*>(params_.data()), sizeof(S) * static_cast<std::size_t>(n));
    return out;
}

template <typename S>
auto Network<S>::deserialize(const std::string& blob) -> Network {
    const auto nl1 = blob.find('\n');
    const auto nl2 = nl1 == std::string::npos ? nl1 : blob.find('\n', nl1 + 1);
    if (nl2 == std::string::npos || blob.compare(0, 10, "hal-net 1 ") != 0) {
        throw Error("network: bad serialized header");
    }
    if (std::stoul(blob.substr(10, nl1 - 10)) != sizeof(S)) {
        throw Error("network: scalar type mismatch");
    }
    Network net;
    net.config_ = NetConfig::parse(blob.substr(nl1 + 1, nl2 - nl1 - 1));
    net.build_layers();
    std::uint64_t n = 0;
    if (blob.size() < nl2 + 1 + sizeof(n)) {
        throw Error("network: truncated parameters");
    }
    std::memcpy(&n, blob.data() + nl2 + 1, sizeof(n));
    if (n != static_cast<std::uint64_t>(net.params_.size()) || blob.size() != nl2 + 1 + sizeof(n) + n * sizeof(S)) {
        throw Error("network: parameter count mismatch");
    }
    std::memcpy(net.params_.data(), blob.data() + nl2 + 1 + sizeof(n), n * sizeof(S));
    return net;
}

template <typename S>
auto dueling_combine(const Matrix<S>& raw, int heads, int width) -> Matrix<S> {
    if (raw.rows() != heads * (width + 1)) {
        throw ShapeError("dueling: expected heads*(width+1) rows");
    }
    Matrix<S> q(heads * width, raw.cols());
    for (int h = 0; h < heads; ++h) {
        const auto v = raw.row(h * (width + 1));
        const auto adv = raw.middleRows(h * (width + 1) + 1, width);
        const Eigen::Matrix<S, 1, Eigen::Dynamic> mean = adv.colwise().mean();
        q.middleRows(h * width, width) = (adv.rowwise() + (v - mean));
    }
    return q;
}

template auto dueling_combine<float>(const Matrix<float>&, int, int) -> Matrix<float>;
template auto dueling_combine<double>(const Matrix<double>&, int, int) -> Matrix<double>;

template class Network<float>;
template class Network<double>;

}    // namespace hal::approx
