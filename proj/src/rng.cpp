#include "mfl/rng.hpp"

#include <cmath>

namespace mfl::rng {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

inline void philox_round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mul_hi_lo(kPhiloxM0, c[0], lo0, hi0);
    mul_hi_lo(kPhiloxM1, c[2], lo1, hi1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    return h;
}

// Map 64 random bits to a double in the open interval (0, 1).
inline double to_unit_open(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> c = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int round = 0; round < 10; ++round) {
        philox_round(c, k);
        k[0] += kPhiloxW0;
        k[1] += kPhiloxW1;
    }
    return c;
}

CounterStream::CounterStream(std::uint64_t seed, std::string_view label, std::uint64_t step)
    : step_(step) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(fnv1a64(label)));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::array<std::uint64_t, 2> CounterStream::raw64(std::uint64_t substream, std::uint32_t block) const {
    // Counter layout: 64 bits of step, 32 bits of substream, 32 bits of block.
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(step_),
        static_cast<std::uint32_t>(step_ >> 32),
        static_cast<std::uint32_t>(substream) ^ static_cast<std::uint32_t>(substream >> 32),
        block,
    };
    const auto out = philox4x32(ctr, key_);
    return {static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32),
            static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32)};
}

double CounterStream::uniform(std::uint64_t substream, std::uint64_t index) const {
    const auto words = raw64(substream, static_cast<std::uint32_t>(index / 2));
    return to_unit_open(words[index % 2]);
}

double CounterStream::uniform_sym(std::uint64_t substream, std::uint64_t index, double half_width) const {
    return half_width * (2.0 * uniform(substream, index) - 1.0);
}

double CounterStream::normal(std::uint64_t substream, std::uint64_t index) const {
    const auto words = raw64(substream, static_cast<std::uint32_t>(index / 2));
    const double u1 = to_unit_open(words[0]);
    const double u2 = to_unit_open(words[1]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return (index % 2 == 0) ? r * std::cos(kTwoPi * u2) : r * std::sin(kTwoPi * u2);
}

void CounterStream::fill_normal(std::uint64_t substream, std::span<double> out) const {
    for (std::size_t i = 0; i < out.size(); i += 2) {
        const auto words = raw64(substream, static_cast<std::uint32_t>(i / 2));
        const double u1 = to_unit_open(words[0]);
        const double u2 = to_unit_open(words[1]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        out[i] = r * std::cos(kTwoPi * u2);
        if (i + 1 < out.size()) out[i + 1] = r * std::sin(kTwoPi * u2);
    }
}

void CounterStream::fill_uniform_sym(std::uint64_t substream, double half_width,
                                     std::span<double> out) const {
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = uniform_sym(substream, i, half_width);
    }
}

} // namespace mfl::rng
