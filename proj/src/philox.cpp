#include "regime/philox.hpp"

#include <cmath>
#include <numbers>

namespace regime::rng {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline Counter round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline Counter make_counter(std::uint64_t lo, std::uint64_t hi) noexcept {
    return {static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo >> 32),
            static_cast<std::uint32_t>(hi), static_cast<std::uint32_t>(hi >> 32)};
}

inline Key make_key(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

inline std::uint64_t join(std::uint32_t lo, std::uint32_t hi) noexcept {
    return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

}  // namespace

Counter philox4x32(Counter counter, Key key) noexcept {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        counter = round(counter, key);
    }
    return counter;
}

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t block) noexcept {
    const Counter out = philox4x32(make_counter(block, stream), make_key(seed));
    const double u1 = to_unit_open(join(out[0], out[1]));
    const double u2 = to_unit_open(join(out[2], out[3]));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

double normal_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
    const auto [a, b] = normal_pair(seed, stream, index / 2);
    return (index % 2 == 0) ? a : b;
}

double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
    // Separate counter space from the normals: high bit of the block word.
    const Counter out = philox4x32(make_counter(index | (1ull << 63), stream), make_key(seed));
    return to_unit_open(join(out[0], out[1]));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    const Counter out = philox4x32(make_counter(~0ull, stream), make_key(seed));
    return join(out[0], out[1]);
}

}  // namespace regime::rng
