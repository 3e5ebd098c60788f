#pragma once

#include <array>
#include <cstdint>

namespace knudsen {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A draw is a pure function of (seed, stream, counter), so any work split
/// across threads reproduces the serial sequence bit for bit.
class CounterRng {
  public:
    explicit constexpr CounterRng(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)} {}

    /// Four independent 32-bit words for the block (stream, counter).
    constexpr std::array<std::uint32_t, 4> block(
        std::uint64_t stream, std::uint64_t counter) const noexcept {
        std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(counter),
            static_cast<std::uint32_t>(counter >> 32),
            static_cast<std::uint32_t>(stream),
            static_cast<std::uint32_t>(stream >> 32)};
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

    /// Two uniforms in [0, 1) with 53-bit resolution.
    constexpr std::array<double, 2> uniform2(
        std::uint64_t stream, std::uint64_t counter) const noexcept {
        const auto w = block(stream, counter);
        return {to_unit(w[0], w[1]), to_unit(w[2], w[3])};
    }

    constexpr double uniform(std::uint64_t stream,
                             std::uint64_t counter) const noexcept {
        return uniform2(stream, counter)[0];
    }

  private:
    static constexpr double to_unit(std::uint32_t hi,
                                    std::uint32_t lo) noexcept {
        const std::uint64_t bits =
            ((std::uint64_t{hi} << 32) | lo) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    std::array<std::uint32_t, 2> key_;
};

}  // namespace knudsen
