#include "sepnet/rng.hpp"

#include <cmath>
#include <numbers>

namespace sepnet {

std::uint64_t Rng::next_u64() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01();
}

double Rng::normal() noexcept {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = -bound % bound; // 2^64 mod bound
    for (;;) {
        const std::uint64_t x = next_u64();
        if (x >= limit) return x % bound;
    }
}

Rng Rng::split(std::uint64_t stream) const noexcept {
    Rng mixer(state_ ^ (0xd1342543de82ef95ULL * (stream + 1)));
    return Rng(mixer.next_u64());
}

} // namespace sepnet
