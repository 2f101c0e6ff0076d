#pragma once

#include <cstdint>
#include <limits>

namespace depgof {

/// SplitMix64 (Steele, Lea & Flood 2014). Used as the project-wide generator:
/// each stream is a 64-bit counter pushed through a fixed avalanche mixer, so
/// independent streams are obtained by seeding with derive_seed(master, index).
/// Satisfies UniformRandomBitGenerator and works with <random> distributions.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        return mix(z);
    }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0, 1); never returns 0 so log() is safe.
    double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Seed for stream `index` under `master`. Streams for different indices are
/// decorrelated by two rounds of mixing.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return SplitMix64::mix(SplitMix64::mix(master ^ 0x6a09e667f3bcc909ULL) + index * 0x9e3779b97f4a7c15ULL);
}

}  // namespace depgof
