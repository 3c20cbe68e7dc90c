#pragma once

#include <cmath>
#include <cstdint>

namespace hypwalk {

// splitmix64 finalizer; used to key streams off (master seed, index) pairs.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with splitmix seeding. Self-contained so that streams are
// bit-identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& si : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            si = z ^ (z >> 31);
        }
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    // Independent stream for a counter value; order-insensitive under
    // parallel execution.
    static Rng forIndex(uint64_t master, uint64_t index) {
        return Rng(mix64(master ^ mix64(index + 0x517cc1b727220a95ULL)));
    }

    uint64_t u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n).
    uint64_t below(uint64_t n) {
        uint64_t threshold = (-n) % n;
        for (;;) {
            uint64_t r = u64();
            if (r >= threshold) return r % n;
        }
    }

    int rangeInt(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace hypwalk
