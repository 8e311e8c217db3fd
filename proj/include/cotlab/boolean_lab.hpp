#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cotlab/rational.hpp"

namespace cotlab {

// A Boolean function of fixed arity evaluated on bitmask inputs: mask bit i
// (LSB-first) is input position i+1. eval must be pure; arity is capped at
// 64 by the mask representation, and exact enumeration further caps at 24.
struct BoolFn {
    size_t arity = 0;
    std::string name;
    std::function<int(uint64_t)> eval;
};

BoolFn parity_fn(size_t n);
BoolFn and_fn(size_t n);

// digit M_k of the product of two n-bit numbers, as a function of the 2n
// operand bits: mask bits [0,n) are X (bit i = xi, LSB first), bits [n,2n)
// are Y. k runs 1..2n with k=1 the least significant product digit.
BoolFn mult_digit_fn(size_t n_bits, size_t k);

// pointwise sensitivity: number of single-bit flips that change f
int sensitivity_at(const BoolFn& f, uint64_t x);

// exact average sensitivity over all 2^arity inputs (OpenMP + serial ref)
Rat avg_sensitivity_exact(const BoolFn& f);
Rat avg_sensitivity_exact_serial(const BoolFn& f);

struct SampledSensitivity {
    double estimate = 0;   // arity * P-hat[random flip changes f]
    double stderr_ = 0;    // normal-approx standard error over inputs
    size_t n_inputs = 0;
    size_t n_flips = 0;
};

// Monte-Carlo estimate: n_inputs random inputs, n_flips random flips each.
// Deterministic in (seed): every input draws from its own split seed and
// the reduction runs in index order, so worker count never shows.
SampledSensitivity avg_sensitivity_sampled(const BoolFn& f, size_t n_inputs,
                                           size_t n_flips, uint64_t seed);
SampledSensitivity avg_sensitivity_sampled_serial(const BoolFn& f,
                                                  size_t n_inputs,
                                                  size_t n_flips,
                                                  uint64_t seed);

// exact average sensitivity of every product digit M_1..M_2n in one sweep
std::vector<Rat> mult_digit_avg_sensitivity_exact(size_t n_bits);
std::vector<Rat> mult_digit_avg_sensitivity_exact_serial(size_t n_bits);

// Sampled average sensitivity of the last (least significant) digit of the
// median of n_numbers values of b_bits each; the median is the
// (floor(N/2)+1)-th smallest. Input layout: number j holds bit positions
// [j*b, (j+1)*b), so arity is n_numbers*b_bits (may exceed 64; this kernel
// does not go through BoolFn).
SampledSensitivity median_lastdigit_sensitivity(size_t n_numbers,
                                                size_t b_bits,
                                                size_t n_inputs,
                                                size_t n_flips, uint64_t seed);
SampledSensitivity median_lastdigit_sensitivity_serial(size_t n_numbers,
                                                       size_t b_bits,
                                                       size_t n_inputs,
                                                       size_t n_flips,
                                                       uint64_t seed);

// correlation probe E[ S(M_T) * prod_{i in A} S(X_i) * prod_{j in B} S(Y_j)
// * prod_{k in C} S(M_k) ] with S(b) = 2b-1, over uniform n-bit X and Y;
// X_i / Y_j index operand bits from the least significant end (i = 1 is the
// LSB), M_k indexes product digits the same way, and C must lie in [1, T-1]
struct FourierQuery {
    size_t n_bits = 0;
    size_t t = 0;
    std::vector<size_t> a, b, c;
};

struct FourierEstimate {
    double estimate = 0;
    double stderr_ = 0;
    size_t samples = 0;
};

FourierEstimate fourier_correlation(const FourierQuery& q, size_t samples,
                                    uint64_t seed);
FourierEstimate fourier_correlation_serial(const FourierQuery& q,
                                           size_t samples, uint64_t seed);

// exact value by enumerating all 2^(2n) operand pairs; n_bits <= 8
Rat fourier_correlation_exact(const FourierQuery& q);

// position -> 0/1, or -1 for a free (star) position
struct Restriction {
    std::vector<int> assign;

    size_t arity() const { return assign.size(); }
    size_t stars() const;
    static Restriction all_stars(size_t arity);
};

// f with the fixed positions of rho forced: a function of the starred
// positions in ascending order, so the arity drops to the star count
BoolFn restrict_apply(const BoolFn& f, const Restriction& rho);

// exact check by enumerating all completions of the stars
bool is_constant_on(const BoolFn& f, const Restriction& rho);

struct RestrictionSearchResult {
    bool found = false;        // a restriction meeting the star target
    Restriction best;          // widest constancy-forcing restriction seen
    size_t best_stars = 0;
    bool none_certified = false; // exhaustive proof: no rho with >=1 star
    size_t candidates_tried = 0;
};

// Greedy + randomized search for a constancy-forcing restriction with at
// least ceil(star_fraction * arity) stars. Greedy seeds fix the highest
// sampled-influence positions first; the randomized phase fills the budget.
// When the single-star sweep fits the budget it runs exhaustively, which
// can certify that no restriction with any star forces constancy.
RestrictionSearchResult restriction_search(const BoolFn& f,
                                           double star_fraction,
                                           size_t budget, uint64_t seed);

} // namespace cotlab
