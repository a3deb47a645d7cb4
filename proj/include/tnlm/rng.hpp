#pragma once

#include <complex>
#include <cstdint>
#include <string_view>

namespace tnlm {

/// Counter-based generator: the i-th output of a stream is a pure function of
/// (seed, stream, i), computed with the SplitMix64 finalizer. Distribution
/// helpers are implemented here rather than taken from <random> because the
/// standard distributions are not bit-reproducible across library vendors.
class CounterRng {
public:
    static constexpr std::string_view algorithm = "splitmix64-counter";

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Raw 64-bit output at the current counter; advances the counter.
    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform integer on [0, bound) (bound > 0), rejection-sampled.
    std::uint64_t uniform_index(std::uint64_t bound);
    /// Standard normal via Box-Muller (one output per call).
    double normal();
    /// Standard complex Gaussian: E|z|^2 = 1.
    std::complex<double> complex_normal();

    /// Independent generator for a named sub-stream of the same seed.
    CounterRng split(std::uint64_t stream) const;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    std::uint64_t counter() const noexcept { return counter_; }

    /// Jump to an absolute position in the stream.
    void set_counter(std::uint64_t counter) noexcept { counter_ = counter; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Well-known stream ids; keeps initialization, data order and sampling
/// randomness decoupled when they share one seed.
namespace streams {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t shuffle = 2;
inline constexpr std::uint64_t sampling = 3;
inline constexpr std::uint64_t gauge = 4;
}  // namespace streams

}  // namespace tnlm
