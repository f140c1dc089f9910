#pragma once

// Replication-indexed random streams. Stream r of a simulation is a pure
// function of (seed, r), so estimates do not depend on how replications are
// scheduled across workers.

#include <cstdint>
#include <limits>

namespace htlc {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** generator; satisfies UniformRandomBitGenerator.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
};

/// Independent stream for replication `index` under master `seed`.
constexpr Xoshiro256 substream(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t sm = seed ^ 0x5851f42d4c957f2dULL;
    const std::uint64_t base = splitmix64(sm);
    std::uint64_t mix = base + index * 0xd1b54a32d192ed03ULL;
    return Xoshiro256(splitmix64(mix));
}

}  // namespace htlc
