#include "cotlab/ntt.hpp"

#include <stdexcept>

namespace cotlab {

namespace {

constexpr uint64_t kMaxN = 1024;
constexpr uint64_t kMaxP = uint64_t(1) << 31;

bool is_pow2(uint64_t n) { return n && (n & (n - 1)) == 0; }

int log2_of(uint64_t n) {
    int l = 0;
    while ((uint64_t(1) << l) < n) ++l;
    return l;
}

bool is_prime(uint64_t p) {
    if (p < 2) return false;
    for (uint64_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

uint64_t mulm(uint64_t a, uint64_t b, uint64_t p) { return a * b % p; }

void check_input(const ModVec& v, const NttPlan& plan) {
    if (v.size() != plan.n)
        throw std::invalid_argument("ntt input length does not match plan");
    for (uint64_t x : v)
        if (x >= plan.p)
            throw std::invalid_argument("ntt input not reduced mod p");
}

uint32_t reverse_bits(uint32_t v, int width) {
    uint32_t r = 0;
    for (int i = 0; i < width; ++i) {
        r = (r << 1) | (v & 1);
        v >>= 1;
    }
    return r;
}

} // namespace

uint64_t powm(uint64_t base, uint64_t exp, uint64_t mod) {
    uint64_t r = 1 % mod;
    base %= mod;
    while (exp) {
        if (exp & 1) r = mulm(r, base, mod);
        base = mulm(base, base, mod);
        exp >>= 1;
    }
    return r;
}

uint64_t invm(uint64_t a, uint64_t p) { return powm(a % p, p - 2, p); }

NttPlan ntt_plan(uint64_t n) {
    if (!is_pow2(n) || n < 2)
        throw std::invalid_argument("ntt length must be a power of two >= 2");
    if (n > kMaxN) throw std::length_error("ntt length exceeds cap of 1024");
    uint64_t p = 0;
    for (uint64_t cand = n + 1;; cand += n) {
        if (cand >= kMaxP)
            throw std::length_error("no working prime below 2^31");
        if (is_prime(cand)) {
            p = cand;
            break;
        }
    }
    for (uint64_t g = 2; g < p; ++g) {
        if (powm(g, n, p) == 1 && powm(g, n / 2, p) != 1)
            return NttPlan{n, p, g};
    }
    throw std::logic_error("no primitive root found"); // unreachable, p prime
}

NttPlan ntt_plan_inverse(const NttPlan& plan) {
    return NttPlan{plan.n, plan.p, invm(plan.omega, plan.p)};
}

ModVec ntt_forward_naive(const ModVec& a, const NttPlan& plan) {
    check_input(a, plan);
    const uint64_t n = plan.n, p = plan.p;
    ModVec out(n, 0);
    for (uint64_t k = 0; k < n; ++k) {
        uint64_t acc = 0;
        for (uint64_t j = 0; j < n; ++j)
            acc = (acc + mulm(a[j], powm(plan.omega, j * k % n, p), p)) % p;
        out[k] = acc;
    }
    return out;
}

namespace {

// shared butterfly driver; `capture` is called after each stage with the
// stage size m and the working array (bit-reversed block layout)
template <typename F>
ModVec ct_transform(const ModVec& a, const NttPlan& plan, F&& capture) {
    check_input(a, plan);
    const uint64_t n = plan.n, p = plan.p;
    const int logn = log2_of(n);
    ModVec x(n);
    for (uint64_t j = 0; j < n; ++j)
        x[reverse_bits(uint32_t(j), logn)] = a[j];
    for (uint64_t m = 2; m <= n; m <<= 1) {
        uint64_t wm = powm(plan.omega, n / m, p);
        for (uint64_t b = 0; b < n; b += m) {
            uint64_t w = 1;
            for (uint64_t k = 0; k < m / 2; ++k) {
                uint64_t u = x[b + k];
                uint64_t t = mulm(w, x[b + k + m / 2], p);
                x[b + k] = (u + t) % p;
                x[b + k + m / 2] = (u + p - t) % p;
                w = mulm(w, wm, p);
            }
        }
        capture(m, x);
    }
    return x;
}

} // namespace

ModVec ntt_forward(const ModVec& a, const NttPlan& plan) {
    return ct_transform(a, plan, [](uint64_t, const ModVec&) {});
}

std::vector<ModVec> ntt_forward_levels(const ModVec& a, const NttPlan& plan) {
    std::vector<ModVec> levels;
    ct_transform(a, plan, [&](uint64_t m, const ModVec& x) {
        const uint64_t n = plan.n;
        const uint64_t blocks = n / m;
        const int logb = log2_of(blocks);
        ModVec level(n);
        for (uint64_t r = 0; r < blocks; ++r) {
            uint64_t src = uint64_t(reverse_bits(uint32_t(r), logb)) * m;
            for (uint64_t k = 0; k < m; ++k) level[r * m + k] = x[src + k];
        }
        levels.push_back(std::move(level));
    });
    return levels;
}

ModVec ntt_inverse(const ModVec& A, const NttPlan& plan) {
    ModVec raw = ntt_forward(A, ntt_plan_inverse(plan));
    uint64_t ninv = invm(plan.n % plan.p, plan.p);
    for (uint64_t& v : raw) v = mulm(v, ninv, plan.p);
    return raw;
}

ModVec ntt_pointwise(const ModVec& a, const ModVec& b, const NttPlan& plan) {
    check_input(a, plan);
    check_input(b, plan);
    ModVec out(plan.n);
    for (uint64_t i = 0; i < plan.n; ++i) out[i] = mulm(a[i], b[i], plan.p);
    return out;
}

Bits ntt_recombine(const ModVec& coeffs, size_t out_bits) {
    Bits lsb_first(out_bits, 0);
    uint64_t carry = 0;
    for (size_t j = 0; j < coeffs.size() || carry; ++j) {
        uint64_t c = carry + (j < coeffs.size() ? coeffs[j] : 0);
        if (j >= out_bits) {
            if (c) throw std::overflow_error("recombined value needs more bits");
            carry = 0;
            continue;
        }
        lsb_first[j] = int(c & 1);
        carry = c >> 1;
    }
    Bits msb_first(out_bits);
    for (size_t j = 0; j < out_bits; ++j)
        msb_first[out_bits - 1 - j] = lsb_first[j];
    return msb_first;
}

} // namespace cotlab
