#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace mfl::rng {

/// Philox-4x32-10 counter-based generator (Salmon et al., SC 2011).
/// One block maps a (key, counter) pair to 128 pseudo-random bits; there is
/// no sequential state, so any draw can be addressed directly.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

/// A deterministic random stream addressed by (seed, label, step, substream, index).
///
/// The (seed, label) pair selects the Philox key, so differently labelled
/// streams are statistically independent even under the same seed. The step
/// and the substream (particle, task or sample index) go into the counter:
/// every draw is a pure function of its address and can be generated in any
/// order, on any number of threads, with identical results.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::string_view label, std::uint64_t step = 0);

    /// Uniform double in the open interval (0, 1).
    double uniform(std::uint64_t substream, std::uint64_t index) const;

    /// Uniform double in [-half_width, half_width].
    double uniform_sym(std::uint64_t substream, std::uint64_t index, double half_width) const;

    /// Standard Gaussian (Box-Muller on a pair of uniforms from one block).
    double normal(std::uint64_t substream, std::uint64_t index) const;

    void fill_normal(std::uint64_t substream, std::span<double> out) const;
    void fill_uniform_sym(std::uint64_t substream, double half_width, std::span<double> out) const;

    std::uint64_t step() const { return step_; }

private:
    std::array<std::uint64_t, 2> raw64(std::uint64_t substream, std::uint32_t block) const;

    std::array<std::uint32_t, 2> key_;
    std::uint64_t step_;
};

} // namespace mfl::rng
