#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A draw is a
// pure function of (key, counter), so any sample index can be generated on
// any worker without coordination.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace hypmax {

class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    explicit Philox4x32(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    Block operator()(std::uint64_t hi, std::uint64_t lo) const noexcept {
        Block ctr{static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo >> 32),
                  static_cast<std::uint32_t>(hi), static_cast<std::uint32_t>(hi >> 32)};
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
            ctr = Block{static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                        static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += kW0;
            key[1] += kW1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57;
    static constexpr std::uint32_t kW0 = 0x9E3779B9;
    static constexpr std::uint32_t kW1 = 0xBB67AE85;

    std::array<std::uint32_t, 2> key_;
};

/// Uniform variates addressed by (stream, index, slot). Each (stream, index) pair
/// owns an independent sequence of slots; two slots share one Philox block.
class CounterUniforms {
public:
    explicit CounterUniforms(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : rng_(seed), stream_(stream) {}

    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t index, std::uint32_t slot) const noexcept {
        const auto block = rng_((stream_ << 24) ^ (slot >> 1), index);
        const std::uint64_t bits = (slot & 1u) ? (std::uint64_t{block[3]} << 32 | block[2])
                                               : (std::uint64_t{block[1]} << 32 | block[0]);
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal from slots (2k, 2k+1) by Box-Muller; `second` picks the sine branch.
    double normal(std::uint64_t index, std::uint32_t pair, bool second) const noexcept {
        const double u1 = uniform(index, 2 * pair);
        const double u2 = uniform(index, 2 * pair + 1);
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        return second ? rad * std::sin(ang) : rad * std::cos(ang);
    }

private:
    Philox4x32 rng_;
    std::uint64_t stream_;
};

} // namespace hypmax
