#ifndef DEGENLAB_RNG_HPP
#define DEGENLAB_RNG_HPP

#include <cstdint>

namespace degenlab {

// SplitMix64 used as a counter-based stream: the i-th output is
// mix64(seed + (i+1) * 0x9E3779B97F4A7C15). Published algorithm (Steele,
// Lea & Flood, OOPSLA 2014; reference C implementation by Vigna), so any
// language reproduces the stream bit-exactly from (seed, index).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    // Independent substream: reseed through the finalizer with a stream tag.
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t tag) {
        return SplitMix64(mix64(seed ^ mix64(tag)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * next_double(); }

private:
    std::uint64_t state_;
};

}  // namespace degenlab

#endif
