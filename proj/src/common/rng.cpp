#include "hal/common/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hal {

auto mix_seed(std::uint64_t a, std::uint64_t b) -> std::uint64_t {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed, 0)) {}

auto Rng::uniform() -> double {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

auto Rng::uniform_int(std::uint64_t n) -> std::uint64_t {
    if (n == 0) {
        throw std::invalid_argument("Rng::uniform_int: empty range");
    }
    // Lemire's nearly-divisionless rejection method.
    std::uint64_t x = engine_();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = engine_();
            m = static_cast<__uint128_t>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

auto Rng::normal() -> double {
    double u = 0;
    double v = 0;
    double s = 0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

auto Rng::derive(std::uint64_t stream_id) const -> Rng {
    return Rng(mix_seed(seed_, stream_id + 0x51ed270b27a3ULL));
}

auto Rng::serialize() const -> std::string {
    std::ostringstream out;
    out << seed_ << ' ' << engine_;
    return out.str();
}

auto Rng::deserialize(const std::string& text) -> Rng {
    std::istringstream in(text);
    Rng rng;
    in >> rng.seed_ >> rng.engine_;
    if (!in) {
        throw std::runtime_error("Rng::deserialize: malformed state");
    }
    return rng;
}

}    // namespace hal
