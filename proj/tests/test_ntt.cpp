#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "cotlab/cot_tasks.hpp"
#include "cotlab/ntt.hpp"
#include "cotlab/rng.hpp"

using namespace cotlab;

namespace {

bool slow_prime(uint64_t p) {
    if (p < 2) return false;
    for (uint64_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

ModVec random_vec(Rng& rng, const NttPlan& plan) {
    ModVec v(plan.n);
    for (auto& x : v) x = rng.below(plan.p);
    return v;
}

// c_k = sum_{i+j = k mod n} a_i b_j mod p, straight from the definition
ModVec cyclic_conv(const ModVec& a, const ModVec& b, const NttPlan& plan) {
    ModVec c(plan.n, 0);
    for (uint64_t i = 0; i < plan.n; ++i)
        for (uint64_t j = 0; j < plan.n; ++j) {
            uint64_t k = (i + j) % plan.n;
            c[k] = (c[k] + a[i] * b[j]) % plan.p;
        }
    return c;
}

} // namespace

TEST_CASE("plans pick the smallest prime and root") {
    NttPlan p4 = ntt_plan(4);
    CHECK(p4.p == 5);
    CHECK(p4.omega == 2);
    NttPlan p2 = ntt_plan(2);
    CHECK(p2.p == 3);
    CHECK(p2.omega == 2);

    for (uint64_t n = 2; n <= 64; n <<= 1) {
        NttPlan plan = ntt_plan(n);
        for (uint64_t q = n + 1; q < plan.p; ++q)
            if (q % n == 1) CHECK_FALSE(slow_prime(q));
        for (uint64_t g = 2; g < plan.omega; ++g)
            CHECK_FALSE((powm(g, n, plan.p) == 1 &&
                         powm(g, n / 2, plan.p) != 1));
    }

    CHECK_THROWS_AS(ntt_plan(0), std::invalid_argument);
    CHECK_THROWS_AS(ntt_plan(1), std::invalid_argument);
    CHECK_THROWS_AS(ntt_plan(6), std::invalid_argument);
    CHECK_THROWS_AS(ntt_plan(2048), std::length_error);
}

TEST_CASE("plan invariants hold for every supported length") {
    for (uint64_t n = 2; n <= 1024; n <<= 1) {
        NttPlan plan = ntt_plan(n);
        CHECK(slow_prime(plan.p));
        CHECK(plan.p % n == 1);
        CHECK(plan.p > n);
        // exact order n: omega^n = 1 and omega^k != 1 for every k < n
        CHECK(powm(plan.omega, n, plan.p) == 1);
        uint64_t w = 1;
        for (uint64_t k = 1; k < n; ++k) {
            w = w * plan.omega % plan.p;
            CHECK(w != 1);
        }
        NttPlan inv = ntt_plan_inverse(plan);
        CHECK(plan.omega * inv.omega % plan.p == 1);
        CHECK(plan.n * invm(plan.n, plan.p) % plan.p == 1);
    }
}

TEST_CASE("modular helpers") {
    CHECK(powm(2, 10, 1000003) == 1024);
    CHECK(powm(7, 0, 13) == 1);
    CHECK(powm(0, 5, 13) == 0);
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        uint64_t a = 1 + rng.below(12);
        CHECK(a * invm(a, 13) % 13 == 1);
    }
}

TEST_CASE("the worked length-4 example") {
    NttPlan plan = ntt_plan(4);
    CHECK(ntt_forward({0, 1, 0, 0}, plan) == ModVec{1, 2, 4, 3});
    CHECK(ntt_forward({1, 1, 0, 0}, plan) == ModVec{2, 3, 0, 4});
    ModVec conv = ntt_pointwise({1, 2, 4, 3}, {2, 3, 0, 4}, plan);
    CHECK(conv == ModVec{2, 1, 0, 2});
    CHECK(ntt_inverse({2, 1, 0, 2}, plan) == ModVec{0, 1, 1, 0});
    CHECK(bits_render(ntt_recombine({0, 1, 1, 0}, 4)) == "0110");
}

TEST_CASE("fast transform equals the direct definition") {
    Rng rng(8);
    for (uint64_t n = 2; n <= 1024; n <<= 1) {
        NttPlan plan = ntt_plan(n);
        CHECK(ntt_forward(ModVec(n, 0), plan) == ModVec(n, 0));
        for (int trial = 0; trial < 3; ++trial) {
            ModVec a = random_vec(rng, plan);
            REQUIRE(ntt_forward(a, plan) == ntt_forward_naive(a, plan));
            REQUIRE(ntt_inverse(ntt_forward(a, plan), plan) == a);
        }
    }
    NttPlan p4 = ntt_plan(4);
    CHECK_THROWS_AS(ntt_forward({1, 2, 3}, p4), std::invalid_argument);
    CHECK_THROWS_AS(ntt_forward({9, 0, 0, 0}, p4), std::invalid_argument);
}

TEST_CASE("pointwise products behave") {
    NttPlan plan = ntt_plan(8);
    Rng rng(12);
    ModVec ones(8, 1);
    for (int trial = 0; trial < 20; ++trial) {
        ModVec a = random_vec(rng, plan), b = random_vec(rng, plan);
        CHECK(ntt_pointwise(a, ones, plan) == a);
        CHECK(ntt_pointwise(a, b, plan) == ntt_pointwise(b, a, plan));
    }
    CHECK_THROWS_AS(ntt_pointwise({1, 2}, {1, 2, 3, 4}, ntt_plan(4)),
                    std::invalid_argument);
}

TEST_CASE("transform route equals brute-force convolution") {
    Rng rng(21);
    for (uint64_t n : {4u, 8u, 16u, 64u}) {
        NttPlan plan = ntt_plan(n);
        for (int trial = 0; trial < 10; ++trial) {
            ModVec a = random_vec(rng, plan), b = random_vec(rng, plan);
            ModVec via_ntt = ntt_inverse(
                ntt_pointwise(ntt_forward(a, plan), ntt_forward(b, plan),
                              plan),
                plan);
            REQUIRE(via_ntt == cyclic_conv(a, b, plan));
        }
    }
}

TEST_CASE("half-padded binary operands never wrap around") {
    // each operand occupies the low n/2 slots, so the cyclic convolution
    // equals the acyclic one and every coefficient stays below p
    Rng rng(33);
    for (uint64_t n : {4u, 16u, 64u}) {
        NttPlan plan = ntt_plan(n);
        for (int trial = 0; trial < 10; ++trial) {
            ModVec a(n, 0), b(n, 0);
            for (uint64_t i = 0; i < n / 2; ++i) {
                a[i] = rng.below(2);
                b[i] = rng.below(2);
            }
            ModVec acyclic(n, 0);
            uint64_t biggest = 0;
            for (uint64_t i = 0; i < n / 2; ++i)
                for (uint64_t j = 0; j < n / 2; ++j) {
                    acyclic[i + j] += a[i] * b[j];
                    biggest = std::max(biggest, acyclic[i + j]);
                }
            REQUIRE(biggest < plan.p);
            ModVec via_ntt = ntt_inverse(
                ntt_pointwise(ntt_forward(a, plan), ntt_forward(b, plan),
                              plan),
                plan);
            REQUIRE(via_ntt == acyclic);
        }
    }
}

TEST_CASE("recombination carries exactly") {
    CHECK(bits_render(ntt_recombine(ModVec(4, 0), 4)) == "0000");
    CHECK(bits_render(ntt_recombine({1, 1, 1}, 4)) == "0111");
    CHECK(bits_render(ntt_recombine({2, 0, 0}, 4)) == "0010"); // carry
    CHECK(bits_render(ntt_recombine({3, 3}, 4)) == "1001");    // 3 + 6
    CHECK_THROWS_AS(ntt_recombine({0, 0, 0, 2}, 4), std::overflow_error);

    // full pipeline product vs an independent 128-bit oracle
    Rng rng(55);
    for (int trial = 0; trial < 60; ++trial) {
        size_t nbits = 1 + rng.below(60);
        Bits x(nbits), y(nbits);
        unsigned __int128 xv = 0, yv = 0;
        for (size_t i = 0; i < nbits; ++i) {
            x[i] = int(rng.below(2));
            y[i] = int(rng.below(2));
            xv = (xv << 1) | unsigned(x[i]);
            yv = (yv << 1) | unsigned(y[i]);
        }
        NttPlan plan = ntt_plan(mult_ntt_length(nbits));
        ModVec a(plan.n, 0), b(plan.n, 0);
        for (size_t i = 0; i < nbits; ++i) {
            a[i] = uint64_t(x[nbits - 1 - i]); // reversed, LSB first
            b[i] = uint64_t(y[nbits - 1 - i]);
        }
        ModVec conv = ntt_inverse(
            ntt_pointwise(ntt_forward(a, plan), ntt_forward(b, plan), plan),
            plan);
        Bits got = ntt_recombine(conv, 2 * nbits);
        unsigned __int128 want = xv * yv;
        unsigned __int128 have = 0;
        for (int bit : got) have = (have << 1) | unsigned(bit);
        REQUIRE(have == want);
    }

    // and against the schoolbook oracle at the 64-bit boundary
    Rng wide(77);
    for (int trial = 0; trial < 5; ++trial) {
        Bits x(64), y(64);
        for (size_t i = 0; i < 64; ++i) {
            x[i] = int(wide.below(2));
            y[i] = int(wide.below(2));
        }
        NttPlan plan = ntt_plan(mult_ntt_length(64));
        ModVec a(plan.n, 0), b(plan.n, 0);
        for (size_t i = 0; i < 64; ++i) {
            a[i] = uint64_t(x[63 - i]);
            b[i] = uint64_t(y[63 - i]);
        }
        ModVec conv = ntt_inverse(
            ntt_pointwise(ntt_forward(a, plan), ntt_forward(b, plan), plan),
            plan);
        REQUIRE(ntt_recombine(conv, 128) == mult_oracle(x, y));
    }
}

TEST_CASE("captured levels are the per-residue block transforms") {
    Rng rng(91);
    for (uint64_t n : {4u, 8u, 16u, 32u}) {
        NttPlan plan = ntt_plan(n);
        for (int trial = 0; trial < 5; ++trial) {
            ModVec a = random_vec(rng, plan);
            auto levels = ntt_forward_levels(a, plan);
            size_t logn = 0;
            while ((uint64_t(1) << logn) < n) ++logn;
            REQUIRE(levels.size() == logn);
            REQUIRE(levels.back() == ntt_forward(a, plan));
            for (size_t l = 0; l < levels.size(); ++l) {
                uint64_t m = uint64_t(1) << (l + 1);
                uint64_t stride = n / m;
                uint64_t root = powm(plan.omega, stride, plan.p);
                for (uint64_t r = 0; r < stride; ++r)
                    for (uint64_t k = 0; k < m; ++k) {
                        uint64_t want = 0;
                        for (uint64_t j = 0; j < m; ++j)
                            want = (want +
                                    a[r + j * stride] *
                                        powm(root, j * k % m, plan.p)) %
                                   plan.p;
                        REQUIRE(levels[l][r * m + k] == want);
                    }
            }
        }
    }
}
