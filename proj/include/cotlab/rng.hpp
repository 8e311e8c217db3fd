#pragma once

#include <cstdint>
#include <vector>

namespace cotlab {

// splitmix64 finalizer; also used to derive child seeds
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Portable deterministic generator. Every randomized operation in the
// toolkit draws from this, so a (seed, parameters) pair pins every output
// byte on every platform. std:: distributions are implementation-defined,
// hence the hand-rolled sampling helpers.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, n); rejection sampling, no modulo bias
    uint64_t below(uint64_t n) {
        uint64_t threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    bool bit() { return next() >> 63; }

    // [0, 1) with 53 random bits
    double unit() { return double(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

// Child seed for work item `index`. Parallel kernels give every index its
// own Rng(split_seed(seed, index)) and reduce in index order, which makes
// results independent of the worker count.
inline uint64_t split_seed(uint64_t seed, uint64_t index) {
    return mix64(seed ^ mix64(index + 0x51a2b3c4d5e6f708ull));
}

} // namespace cotlab
