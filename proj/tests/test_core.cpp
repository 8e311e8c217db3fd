#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cotlab/bitstring.hpp"
#include "cotlab/io.hpp"
#include "cotlab/rational.hpp"
#include "cotlab/rng.hpp"
#include "cotlab/trace.hpp"

using namespace cotlab;

TEST_CASE("hamming neighbor flips exactly the named position") {
    CHECK(bits_render(hamming_neighbor(bits_parse("1011"), 1)) == "0011");
    CHECK(bits_render(hamming_neighbor(bits_parse("0000"), 4)) == "0001");
    CHECK_THROWS_AS(hamming_neighbor(bits_parse("101"), 0),
                    std::out_of_range);
    CHECK_THROWS_AS(hamming_neighbor(bits_parse("101"), 4),
                    std::out_of_range);

    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 1 + rng.below(24);
        Bits x(n);
        for (auto& b : x) b = int(rng.below(2));
        size_t i = 1 + rng.below(n);
        Bits y = hamming_neighbor(x, i);
        CHECK(hamming_neighbor(y, i) == x); // involution
        size_t changed = 0;
        for (size_t j = 0; j < n; ++j) changed += size_t(x[j] != y[j]);
        CHECK(changed == 1);
        CHECK(y[i - 1] == 1 - x[i - 1]);
    }
}

TEST_CASE("bit string helpers round-trip") {
    CHECK(bits_render(bits_from_u64(6, 4)) == "0110");
    CHECK(u64_from_bits(bits_parse("0110")) == 6);
    CHECK(bits_parity(bits_parse("1011")) == 1);
    CHECK(bits_parity(bits_parse("1111")) == 0);
    CHECK_THROWS_AS(bits_from_u64(8, 3), std::invalid_argument);
    CHECK_THROWS_AS(bits_parse("10x"), std::invalid_argument);

    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        uint64_t v = rng.next() >> rng.below(64);
        size_t width = 64;
        CHECK(u64_from_bits(bits_from_u64(v, width)) == v);
    }
}

TEST_CASE("trace parsing keeps every label and the boundary") {
    TokenTrace t = TokenTrace::parse("1 0 1 # 0", 3);
    CHECK(t.tokens.size() == 5);
    CHECK(t.input() == std::vector<std::string>{"1", "0", "1"});
    CHECK(t.cot() == std::vector<std::string>{"#", "0"});

    TokenTrace sep = TokenTrace::parse("-1 1 0 -1 1 1 -1", 7);
    CHECK(sep.tokens.size() == 7);
    CHECK(sep.tokens.front() == "-1");
    CHECK(sep.render() == "-1 1 0 -1 1 1 -1");

    CHECK_THROWS_AS(TokenTrace::parse("a b", 3), std::logic_error);

    // round-trip across the label shapes the tasks use
    std::vector<std::string> labels = {"-1", "QUERY1", "3|R|odd", ";",
                                       "BOS",  "EOS",   "a1",      "0"};
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        TokenTrace orig;
        size_t n = 1 + rng.below(30);
        for (size_t i = 0; i < n; ++i)
            orig.tokens.push_back(labels[rng.below(labels.size())]);
        orig.input_len = rng.below(n + 1);
        TokenTrace back = TokenTrace::parse(orig.render(), orig.input_len);
        CHECK(back.tokens == orig.tokens);
        CHECK(back.input_len == orig.input_len);
    }
}

TEST_CASE("alphabet rejects duplicates and keeps construction order") {
    Alphabet a({"0", "1", "#"});
    CHECK(a.labels.size() == 3);
    CHECK(a.index_of.at("#") == 2);
    CHECK_THROWS_AS(Alphabet({"x", "y", "x"}), std::invalid_argument);
}

TEST_CASE("generator streams are deterministic and well ranged") {
    Rng a(42), b(42), c(43);
    bool all_equal = true, any_differs = false;
    for (int i = 0; i < 1000; ++i) {
        uint64_t va = a.next();
        all_equal = all_equal && va == b.next();
        any_differs = any_differs || va != c.next();
    }
    CHECK(all_equal);
    CHECK(any_differs);

    Rng r(7);
    for (int i = 0; i < 2000; ++i) {
        CHECK(r.below(13) < 13);
        double u = r.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }

    // below(n) covers all residues for small n
    std::set<uint64_t> seen;
    Rng s(11);
    for (int i = 0; i < 200; ++i) seen.insert(s.below(5));
    CHECK(seen == std::set<uint64_t>{0, 1, 2, 3, 4});

    // shuffle produces a permutation
    std::vector<int> v{1, 2, 3, 4, 5, 6, 7};
    Rng t(5);
    t.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{1, 2, 3, 4, 5, 6, 7});

    // children of one seed differ from each other and from the parent
    CHECK(split_seed(1, 0) != split_seed(1, 1));
    CHECK(split_seed(1, 0) != split_seed(2, 0));
}

TEST_CASE("rationals stay exact, normalized, and overflow-checked") {
    CHECK(Rat(1, 3) + Rat(1, 6) == Rat(1, 2));
    CHECK(Rat(2, 4) == Rat(1, 2));
    CHECK(Rat(1, -2) == Rat(-1, 2));
    CHECK(Rat(3) * Rat(1, 3) == Rat(1));
    CHECK(Rat(7, 2) - Rat(1, 2) == Rat(3));
    CHECK(Rat(5, 3) / Rat(5, 3) == Rat(1));
    CHECK(-Rat(4, 6) == Rat(-2, 3));
    CHECK(Rat(1, 3) < Rat(1, 2));
    CHECK(Rat(-1, 2) < Rat(-1, 3));
    CHECK(Rat(2, 3).str() == "2/3");
    CHECK(Rat(-6).str() == "-6");
    CHECK(Rat::parse("2/3") == Rat(2, 3));
    CHECK(Rat::parse("-6") == Rat(-6));
    CHECK_THROWS_AS(Rat::parse("six"), std::invalid_argument);
    CHECK_THROWS_AS(Rat(1) / Rat(0), std::domain_error);
    CHECK_THROWS_AS(Rat(1, 0), std::domain_error);
    CHECK_THROWS_AS(Rat(INT64_MAX) + Rat(1), std::overflow_error);
    CHECK_THROWS_AS(Rat(INT64_MAX) * Rat(2), std::overflow_error);
    CHECK(Rat(1, 4).to_double() == doctest::Approx(0.25));
    CHECK(Rat(3).is_integer());
    CHECK_FALSE(Rat(3, 2).is_integer());
}

TEST_CASE("hashes and csv emission are stable") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") != fnv1a64("b"));
    CHECK(hex64(0) == "0000000000000000");
    CHECK(hex64(0xdeadbeefull) == "00000000deadbeef");

    std::ostringstream ss;
    CsvWriter csv(ss);
    csv.header({"n", "value"});
    csv.row({CsvWriter::num(size_t(3)), CsvWriter::num(0.5)});
    CHECK(ss.str() == "n,value\n3,0.5\n");
}

TEST_CASE("file io round-trips bytes") {
    std::string path = "test_core_scratch.txt";
    write_file(path, "line one\nline two\n");
    CHECK(read_file(path) == "line one\nline two\n");
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_file("definitely-missing-file"),
                    std::runtime_error);
}
