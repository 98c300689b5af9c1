#ifndef KBI_RNG_HPP
#define KBI_RNG_HPP

#include <cstdint>
#include <limits>

// Counter-based stream derivation: every stochastic task owns a generator
// derived from (master seed, stream, substream), so results do not depend on
// scheduling or worker count.

namespace kbi {

/// SplitMix64 finalizer; bijective 64-bit mixer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Steele-Lea-Flood splittable generator; used here to expand seeds.
class SplitMix64 {
  public:
    explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

    constexpr std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

  private:
    std::uint64_t state_;
};

/// xoshiro256++ (Blackman & Vigna). 256-bit state, period 2^256-1.
/// Satisfies UniformRandomBitGenerator so std distributions plug in.
class Xoshiro256 {
  public:
    using result_type = std::uint64_t;

    Xoshiro256() : Xoshiro256(0, 0, 0) {}

    /// Stream constructor: state expanded with SplitMix64 from a key built
    /// out of (seed, stream, substream). Distinct keys give independent
    /// streams; identical keys reproduce bit-for-bit.
    Xoshiro256(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
        std::uint64_t key = mix64(seed ^ 0x6A09E667F3BCC909ULL);
        key = mix64(key ^ mix64(stream + 0xBB67AE8584CAA73BULL));
        key = mix64(key ^ mix64(substream + 0x3C6EF372FE94F82BULL));
        SplitMix64 sm(key);
        for (auto& word : state_) word = sm.next();
        // All-zero state is the one invalid point of xoshiro.
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0,1) with 53 random bits.
    double next_double() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0,n). Lemire's multiply-shift with rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        std::uint64_t x = (*this)();
        auto m = static_cast<unsigned __int128>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = (*this)();
                m = static_cast<unsigned __int128>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// True with probability p.
    bool bernoulli(double p) { return next_double() < p; }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

/// Derive the generator for one task of one run.
inline Xoshiro256 derive_stream(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t substream = 0) {
    return Xoshiro256(seed, stream, substream);
}

// Substream tags shared by the simulation pipeline.
namespace sub {
inline constexpr std::uint64_t proposal = 0;
inline constexpr std::uint64_t graph = 1;
inline constexpr std::uint64_t spins = 2;
} // namespace sub

} // namespace kbi

#endif // KBI_RNG_HPP
