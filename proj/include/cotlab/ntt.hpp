#pragma once

#include <cstdint>
#include <vector>

#include "cotlab/bitstring.hpp"

namespace cotlab {

using ModVec = std::vector<uint64_t>;

// Parameters for an exact length-n transform: the smallest prime p with
// p ≡ 1 (mod n) and p > n, and the smallest primitive n-th root of unity
// mod p. n must be a power of two, capped at 1024; p stays below 2^31.
struct NttPlan {
    uint64_t n = 0;
    uint64_t p = 0;
    uint64_t omega = 0;
};

NttPlan ntt_plan(uint64_t n);

// plan for the inverse direction: same n and p, omega replaced by omega^-1
NttPlan ntt_plan_inverse(const NttPlan& plan);

uint64_t powm(uint64_t base, uint64_t exp, uint64_t mod);
uint64_t invm(uint64_t a, uint64_t p); // p prime

// A_k = sum_j a_j omega^{jk} mod p; iterative radix-2 Cooley-Tukey
ModVec ntt_forward(const ModVec& a, const NttPlan& plan);

// naive O(n^2) evaluation kept as the reference implementation for tests
ModVec ntt_forward_naive(const ModVec& a, const NttPlan& plan);

// Intermediate state after every butterfly stage, in natural index order:
// levels[l] (l = 0 .. log2(n)-1, stage size m = 2^(l+1)) holds, for residue
// r = 0 .. n/m-1 ascending, the length-m transform of the stride subsequence
// a[r], a[r+n/m], ... The bit-reversed block layout of the working array is
// normalized away; the last level equals ntt_forward(a).
std::vector<ModVec> ntt_forward_levels(const ModVec& a, const NttPlan& plan);

// a_j = n^-1 sum_k A_k omega^{-jk} mod p
ModVec ntt_inverse(const ModVec& A, const NttPlan& plan);

ModVec ntt_pointwise(const ModVec& a, const ModVec& b, const NttPlan& plan);

// sum_j coeffs[j] * 2^j with carry propagation, rendered MSB-left and
// zero-padded to out_bits; throws if the value needs more than out_bits
Bits ntt_recombine(const ModVec& coeffs, size_t out_bits);

} // namespace cotlab
