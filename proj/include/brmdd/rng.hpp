#pragma once
// Counter-seeded pseudo-random streams with bit-reproducible output.
//
// std::uniform_real_distribution is implementation-defined, so all uniform
// variates are produced here from raw 64-bit words. A realization stream is a
// pure function of (master_seed, realization_index): realizations can be
// computed in any order, on any number of workers, and still agree bitwise.

#include <cstdint>

namespace brmdd {

/// SplitMix64 finalizer; good 64-bit mixing for seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Sub-seed for one disorder realization.
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t realization_index) {
    std::uint64_t a = mix64(master_seed ^ 0xa0761d6478bd642fULL);
    std::uint64_t b = mix64(realization_index * 0x9e3779b97f4a7c15ULL + 0x8bb84b93962eacc9ULL);
    return mix64(a ^ (b + 0x2545f4914f6cdd1dULL));
}

/// xoshiro256++ generator.
class Xoshiro256 {
  public:
    explicit Xoshiro256(std::uint64_t seed) {
        // SplitMix64 expansion of the seed into the four state words.
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            w = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [-bound, bound).
    double uniform_symmetric(double bound) { return bound * (2.0 * uniform01() - 1.0); }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace brmdd
