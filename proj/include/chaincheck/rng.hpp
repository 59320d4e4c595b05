// Seeded, portable random number generation. All randomness in the pipeline
// flows through Xoshiro256** seeded via SplitMix64, so datasets, traces and
// model weights are bit-identical across platforms and standard-library
// implementations (std::shuffle and distributions are not portable).

#ifndef CHAINCHECK_RNG_HPP
#define CHAINCHECK_RNG_HPP

#include <cstdint>
#include <vector>

namespace chaincheck {

// Used for seed expansion: one u64 seed -> arbitrarily many stream seeds.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

class Xoshiro256 {
public:
    explicit Xoshiro256(uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Unbiased bounded draw (rejection on the top of the range).
    uint64_t next_below(uint64_t bound) {
        if (bound <= 1) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v = next();
        while (v >= limit) v = next();
        return v % bound;
    }

    // Uniform in [0,1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool next_bool() { return (next() >> 63) != 0; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
};

// Fisher-Yates with explicit bounded draws; portable unlike std::shuffle.
template <typename T>
void shuffle(std::vector<T>& v, Xoshiro256& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace chaincheck

#endif
