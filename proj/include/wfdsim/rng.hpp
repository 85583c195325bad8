#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace wfd {

/// xorshift64* generator (Vigna 2016) seeded through one splitmix64 step.
///
/// The standard distributions are implementation-defined, so every draw the
/// simulator makes goes through the helpers below to stay bit-identical across
/// toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), state_(mix(seed)) {
        if (state_ == 0)
            state_ = 0x9E3779B97F4A7C15ull;
    }

    /// Substream for one device: seed XOR stream index.
    static Rng substream(std::uint64_t seed, std::uint64_t stream) { return Rng{seed ^ stream}; }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1Dull;
    }

    /// Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
    std::uint64_t uniform_index(std::uint64_t bound) {
        if (bound == 0)
            throw std::invalid_argument("uniform_index: empty range");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = next_u64();
        while (x >= limit)
            x = next_u64();
        return x % bound;
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) {
        if (p <= 0.0)
            return false;
        if (p >= 1.0)
            return true;
        return uniform01() < p;
    }

    template <typename T>
    const T& pick(std::span<const T> choices) {
        return choices[uniform_index(choices.size())];
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t state_;
};

} // namespace wfd
