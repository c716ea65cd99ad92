// File: rng.hpp
// Description: Seedable random stream with portable distribution mappings

#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>

namespace hal {

// Wraps std::mt19937_64. Distributions are implemented here rather than with
// the <random> distribution classes so that draws are identical across
// standard library implementations.
class Rng {
public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed);

    auto next_u64() -> std::uint64_t { return engine_(); }

    // Uniform in [0, 1) with 53 bits of resolution.
    auto uniform() -> double;

    // Uniform integer in [0, n). n must be positive.
    auto uniform_int(std::uint64_t n) -> std::uint64_t;
    auto uniform_index(std::size_t n) -> std::size_t { return static_cast<std::size_t>(uniform_int(n)); }

    auto bernoulli(double p) -> bool { return uniform() < p; }

    // Standard normal via the polar method; the second variate is discarded.
    auto normal() -> double;

    // Independent child stream, derived deterministically from this stream's
    // seed and the stream id. Does not advance this stream.
    [[nodiscard]] auto derive(std::uint64_t stream_id) const -> Rng;

    [[nodiscard]] auto seed() const -> std::uint64_t { return seed_; }

    auto serialize() const -> std::string;
    static auto deserialize(const std::string& text) -> Rng;

    friend auto operator==(const Rng& a, const Rng& b) -> bool { return a.seed_ == b.seed_ && a.engine_ == b.engine_; }

private:
    std::uint64_t seed_ = 0;
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used for seed derivation.
auto mix_seed(std::uint64_t a, std::uint64_t b) -> std::uint64_t;

}    // namespace hal
