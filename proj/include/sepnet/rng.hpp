#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace sepnet {

/// SplitMix64 generator.
///
/// Every draw is defined here rather than through <random> distributions, whose
/// output differs between standard library implementations. Seeds therefore
/// replay byte-for-byte on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() noexcept;
    double uniform(double lo, double hi) noexcept;
    /// Standard normal via Box-Muller (no cached second value).
    double normal() noexcept;
    /// Uniform integer in [0, bound), bound > 0, rejection-sampled.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Independent child stream. Does not advance this generator.
    Rng split(std::uint64_t stream) const noexcept;

    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
};

} // namespace sepnet
