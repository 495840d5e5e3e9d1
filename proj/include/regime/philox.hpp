#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace regime::rng {

/// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11). Output is
/// a pure function of (counter, key), so any stream position can be reached
/// directly and streams never need to be advanced in order.
using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter philox4x32(Counter counter, Key key) noexcept;

/// Uniform double in the open interval (0, 1) from the top 52 bits of w.
/// Every result is exactly representable, so 1 is never reached.
inline double to_unit_open(std::uint64_t w) noexcept {
    return (static_cast<double>(w >> 12) + 0.5) * 0x1.0p-52;
}

/// Pair of independent standard normals for block `block` of stream
/// `stream` under `seed` (Box-Muller on two 64-bit uniforms).
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t block) noexcept;

/// Standard normal number `index` of stream `stream`; indices 2k and 2k+1
/// share one cipher block.
double normal_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

/// Uniform (0,1) number `index` of stream `stream`.
double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

/// 64-bit value for deriving child seeds from a parent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace regime::rng
