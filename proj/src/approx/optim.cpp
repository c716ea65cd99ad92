#include "hal/approx/optim.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "hal/common/error.hpp"

namespace hal::approx {

template <typename S>
Adam<S>::Adam(AdamConfig config, Eigen::Index size)
    : config_(config), m_(Vector<S>::Zero(size)), v_(Vector<S>::Zero(size)) {
    if (!(config_.lr >= 0.0) || !(config_.eps > 0.0)) {
        throw ConfigError("adam", "lr must be >= 0 and eps > 0");
    }
}

template <typename S>
void Adam<S>::step(Vector<S>& params, const Vector<S>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw ShapeError("adam: parameter count mismatch");
    }
    if (!grads.allFinite()) {
        throw NonFiniteError("adam: non-finite gradient, update rejected");
    }
    S scale = 1;
    if (config_.clip_norm > 0.0) {
        const double norm = static_cast<double>(grads.norm());
        if (norm > config_.clip_norm) {
            scale = static_cast<S>(config_.clip_norm / norm);
        }
    }
    ++t_;
    const auto b1 = static_cast<S>(config_.beta1);
    const auto b2 = static_cast<S>(config_.beta2);
    m_ = b1 * m_ + (1 - b1) * scale * grads;
    v_ = b2 * v_ + (1 - b2) * (scale * grads).cwiseAbs2();
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const auto lr = static_cast<S>(config_.lr / c1);
    const auto root_c2 = static_cast<S>(std::sqrt(c2));
    const auto eps = static_cast<S>(config_.eps);
    params.array() -= lr * m_.array() / ((v_.array().sqrt() / root_c2) + eps);
}

template <typename S>
auto Adam<S>::serialize() const -> std::string {
    std::ostringstream head;
    head.precision(17);
    head << "hal-adam 1 " << sizeof(S) << ' ' << config_.lr << ' ' << config_.eps << ' ' << config_.beta1 << ' '
         << config_.beta2 << ' ' << config_.clip_norm << ' ' << t_ << ' ' << m_.size() << '\n';
    std::string out = head.str();
    out.append(reinterpret_cast<const char*>(m_.data()), sizeof(S) * static_cast<std::size_t>(m_.size()));
    out.append(reinterpret_cast<const char*>(v_.data()), sizeof(S) * static_cast<std::size_t>(v_.size()));
    return out;
}

template <typename S>
auto Adam<S>::deserialize(const std::string& blob) -> Adam {
    const auto nl = blob.find('\n');
    if (nl == std::string::npos) {
        throw Error("adam: bad serialized header");
    }
    std::istringstream in(blob.substr(0, nl));
    std::string magic;
    int version = 0;
    std::size_t scalar = 0;
    Eigen::Index n = 0;
    Adam a;
    in >> magic >> version >> scalar >> a.config_.lr >> a.config_.eps >> a.config_.beta1 >> a.config_.beta2 >>
        a.config_.clip_norm >> a.t_ >> n;
    if (!in || magic != "hal-adam" || version != 1 || scalar != sizeof(S)) {
        throw Error("adam: bad serialized header");
    }
    const std::size_t bytes = sizeof(S) * static_cast<std::size_t>(n);
    if (blob.size() != nl + 1 + 2 * bytes) {
        throw Error("adam: truncated moments");
    }
    a.m_.resize(n);
    a.v_.resize(n);
    std::memcpy(a.m_.data(), blob.data() + nl + 1, bytes);
    std::memcpy(a.v_.data(), blob.data() + nl + 1 + bytes, bytes);
    return a;
}

template class Adam<float>;
template class Adam<double>;

}    // namespace hal::approx
