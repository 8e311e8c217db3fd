// End-to-end checks of the properties this toolkit promises, one test case
// per numbered criterion; each prints a single PASS/FAIL line with its
// runtime so the suite's output doubles as a checklist.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "cotlab/boolean_lab.hpp"
#include "cotlab/cot_tasks.hpp"
#include "cotlab/datagen.hpp"
#include "cotlab/rng.hpp"
#include "cotlab/uhat.hpp"
#include "cotlab/uhat_programs.hpp"

using namespace cotlab;

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

void report(int id, bool ok, double secs, double budget,
            const std::string& what) {
    std::printf("criterion %2d: %s  (%6.2f s / %4.0f s)  %s\n", id,
                ok ? "PASS" : "FAIL", secs, budget, what.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(ok, ("criterion " + std::to_string(id) + ": " + what));
    CHECK_MESSAGE(secs <= budget,
                  ("criterion " + std::to_string(id) + " over budget"));
}

std::string run_cli(const std::string& args, int& rc) {
    std::string cmd = std::string(CLI_PATH) + " " + args;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
    int status = pclose(pipe);
    rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

Bits random_bits(size_t n, Rng& rng) {
    Bits b(n);
    for (auto& v : b) v = int(rng.bit());
    if (n) b[0] = 1; // keep the operand width honest
    return b;
}

// ratios r_i of measurement to model, rescaled by the minimax constant
// c* = sqrt(max r * min r); the family fits when every r_i/c* is in [1/2, 2]
bool ratios_fit(const std::vector<double>& ratios, double& spread) {
    double lo = *std::min_element(ratios.begin(), ratios.end());
    double hi = *std::max_element(ratios.begin(), ratios.end());
    spread = hi / lo;
    double c = std::sqrt(lo * hi);
    for (double r : ratios)
        if (r / c < 0.5 || r / c > 2.0) return false;
    return true;
}

int dfs_reachable(const ReachInstance& inst) {
    std::vector<std::vector<size_t>> out(inst.vertices);
    for (const auto& [u, v] : inst.edges) out[u].push_back(v);
    std::vector<int> seen(inst.vertices, 0);
    std::vector<size_t> stack{inst.query.first};
    while (!stack.empty()) {
        size_t u = stack.back();
        stack.pop_back();
        if (u == inst.query.second) return 1;
        if (seen[u]) continue;
        seen[u] = 1;
        for (size_t v : out[u]) stack.push_back(v);
    }
    return 0;
}

// chain 2 -> 1 -> 0 in canonical form, distances by hand
DagSample chain3() {
    DagSample d;
    d.vertices = 3;
    d.edges = {{1, 0}, {2, 1}};
    size_t inf = unreachable_distance;
    d.dist = {{0, inf, inf}, {1, 0, inf}, {2, 1, 0}};
    d.wl = wl_hash(3, d.edges);
    return d;
}

} // namespace

TEST_CASE("criterion 1: compact multiplication worked trace") {
    Stopwatch sw;
    int rc = -1;
    std::string out = run_cli("gen-cot mult --x 10 --y 11 --mode compact", rc);
    const std::string want =
        "-1 1 0 -1 1 1 -1 "
        "-1 0 1 0 0 -1 1 1 0 0 -1 1 2 4 3 -1 2 3 0 4 "
        "-1 a 1 b 2 c 4 d 3 -1 a 2 b 3 c 0 d 4 -1 a 2 b 1 c 0 d 2 "
        "-1 2 1 0 2 -1 0 1 1 0 -1 0 1 1 0 -1\n";
    bool ok = rc == 0 && out == want;
    report(1, ok, sw.secs(), 1, "cli compact product trace is byte-exact");
}

TEST_CASE("criterion 2: median worked trace") {
    Stopwatch sw;
    MedianInstance inst;
    inst.numbers = {343, 19, 852};
    TokenTrace tr = cot_generate(MedianJob{inst, 1});
    bool ok = tr.render() ==
              "BOS 3 4 3 ; 0 1 9 ; 8 5 2 ; SEP 0 1 9 ; 3 4 3 ; EOS";
    report(2, ok, sw.secs(), 1, "median scratchpad line is byte-exact");
}

TEST_CASE("criterion 3: parity sensitivity and scratchpad length") {
    Stopwatch sw;
    bool ok = true;
    for (size_t n = 1; n <= 16; ++n)
        ok = ok && avg_sensitivity_exact(parity_fn(n)) == Rat((long long)n);
    for (size_t n = 1; n <= 500; ++n) {
        Rng rng(split_seed(3, n));
        TokenTrace tr = cot_generate(ParityJob{random_bits(n, rng), 1});
        size_t meat = 0;
        for (const auto& t : tr.cot())
            if (t != "#") ++meat;
        ok = ok && meat == n + 1;
    }
    report(3, ok, sw.secs(), 10,
           "exact average sensitivity is N; scratchpad carries N+1 tokens");
}

TEST_CASE("criterion 4: interpreter equals the oracles exhaustively") {
    Stopwatch sw;
    bool ok = true;

    for (size_t n = 1; n <= 12 && ok; ++n) {
        UhatProgram prog = and_head(n);
        for (uint64_t m = 0; m < (uint64_t(1) << n) && ok; ++m) {
            std::vector<std::string> in(n);
            int all = 1;
            for (size_t i = 0; i < n; ++i) {
                int bit = int((m >> (n - 1 - i)) & 1);
                in[i] = bit ? "1" : "0";
                all &= bit;
            }
            ok = vm_step(prog, in).token == (all ? "1" : "0");
        }
    }
    bool and_ok = ok;

    for (size_t n = 1; n <= 8 && ok; ++n) {
        UhatProgram prog = parity_dot_by_dot(n);
        size_t steps = (size_t(1) << n) + 2;
        for (uint64_t m = 0; m < (uint64_t(1) << n) && ok; ++m) {
            std::vector<std::string> in(n);
            int par = 0;
            for (size_t i = 0; i < n; ++i) {
                int bit = int((m >> (n - 1 - i)) & 1);
                in[i] = bit ? "1" : "0";
                par ^= bit;
            }
            DecodeResult res = vm_decode(prog, in, StopRule::steps(steps));
            auto cot = res.trace.cot();
            ok = cot.size() == steps && cot.back() == (par ? "1" : "0") &&
                 res.all_outputs_one_hot;
        }
    }
    bool dots_ok = ok;

    TuringMachine tm = tm_parity();
    UhatProgram compiled = tm_compile(tm, 8, 12);
    for (size_t n = 0; n <= 8 && ok; ++n)
        for (uint64_t m = 0; m < (uint64_t(1) << n) && ok; ++m) {
            std::vector<std::string> word(n);
            for (size_t i = 0; i < n; ++i)
                word[i] = (m >> (n - 1 - i)) & 1 ? "1" : "0";
            ok = tm_compiled_decode(compiled, tm, word, 12).tokens ==
                 tm_cot_trace(tm, word, 12).tokens;
        }

    report(4, ok, sw.secs(), 300,
           std::string("conjunction ") + (and_ok ? "ok" : "BAD") +
               ", dot-by-dot parity " + (dots_ok ? "ok" : "BAD") +
               ", compiled turing machine " + (ok ? "ok" : "BAD"));
}

TEST_CASE("criterion 5: scratchpad length laws") {
    Stopwatch sw;

    std::vector<double> school;
    for (size_t n = 8; n <= 64; n += 8) {
        Rng rng(split_seed(5, n));
        double len = 0;
        const int reps = 3;
        for (int t = 0; t < reps; ++t)
            len += double(cot_generate(MultJob{random_bits(n, rng),
                                               random_bits(n, rng),
                                               MultJob::Mode::schoolbook})
                              .cot()
                              .size());
        school.push_back(len / reps / double(n * n));
    }

    std::vector<double> butter;
    for (size_t n = 8; n <= 128; n *= 2) {
        Rng rng(split_seed(50, n));
        double len = 0;
        const int reps = 3;
        for (int t = 0; t < reps; ++t)
            len += double(cot_generate(MultJob{random_bits(n, rng),
                                               random_bits(n, rng),
                                               MultJob::Mode::ntt_butterflies})
                              .cot()
                              .size());
        butter.push_back(len / reps / (double(n) * std::log2(double(n))));
    }

    std::vector<double> bfs;
    Rng vr(777);
    for (int i = 0; i < 1000; ++i) {
        size_t v = 5 + vr.below(31);
        uint64_t sub = split_seed(777, uint64_t(i));
        DagSample d;
        for (uint64_t redraw = 0;; ++redraw) {
            d = gen_dag(v, 0.5, split_seed(sub, redraw));
            if (!d.edges.empty()) break;
        }
        Rng qrng(split_seed(sub, 9999));
        QuerySample q = sample_query(d, qrng);
        ReachInstance inst{v, d.edges, q.query,
                           ReachInstance::Encoding::binary};
        size_t len = cot_generate(ReachJob{inst}).cot().size();
        bfs.push_back(double(len) /
                      (double(d.edges.size()) * std::log2(double(v))));
    }

    double s1 = 0, s2 = 0, s3 = 0;
    bool ok = ratios_fit(school, s1) && ratios_fit(butter, s2) &&
              ratios_fit(bfs, s3);
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "ratio spreads: schoolbook/N^2 %.2f, butterflies/NlogN "
                  "%.2f, bfs/ElogV %.2f (all must be <= 4)",
                  s1, s2, s3);
    report(5, ok, sw.secs(), 120, detail);
}

TEST_CASE("criterion 6: product digit sensitivity profile") {
    Stopwatch sw;
    std::vector<Rat> as = mult_digit_avg_sensitivity_exact(8);
    // digits counted from the most significant end, the figure-axis
    // convention; as[i] is LSB-indexed so MSB digit k sits at index 16-k
    auto msb = [&](size_t k) { return as[16 - k].to_double(); };
    size_t peak = 1;
    for (size_t k = 2; k <= 16; ++k)
        if (msb(k) > msb(peak)) peak = k;
    bool ok = peak >= 7 && peak <= 9;
    for (size_t k = 3; k <= 13; ++k) {
        double model = double(std::min(k, 16 - k));
        ok = ok && msb(k) >= 0.75 * model && msb(k) <= 1.25 * model;
    }
    char detail[120];
    std::snprintf(detail, sizeof detail,
                  "peak digit %zu, every digit 3..13 within 25%% of "
                  "min(k, 2N-k)",
                  peak);
    report(6, ok, sw.secs(), 120, detail);
}

TEST_CASE("criterion 7: median last-digit sensitivity grows linearly") {
    Stopwatch sw;
    std::vector<double> xs, ys;
    double at32 = 0;
    for (size_t n : {size_t(8), size_t(16), size_t(32), size_t(64)}) {
        size_t b = 1 + size_t(std::ceil(std::log2(double(n))));
        SampledSensitivity s =
            median_lastdigit_sensitivity(n, b, 200, 200, split_seed(7, n));
        xs.push_back(double(n));
        ys.push_back(s.estimate);
        if (n == 32) at32 = s.estimate;
    }
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / double(xs.size());
        my += ys[i] / double(ys.size());
    }
    double num = 0, den = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    double slope = num / den;
    bool ok = slope >= 0.3 && at32 >= 0.4 * 32;
    char detail[120];
    std::snprintf(detail, sizeof detail,
                  "fit slope %.3f (>= 0.3), estimate at N=32 is %.1f (>= "
                  "12.8)",
                  slope, at32);
    report(7, ok, sw.secs(), 120, detail);
}

TEST_CASE("criterion 8: correlation decay across product digits") {
    Stopwatch sw;
    bool ok =
        fourier_correlation_exact(FourierQuery{1, 1, {1}, {1}, {}}) ==
        Rat(1, 2);

    const size_t n = 12, combos = 100, samples = 100000;
    std::vector<double> best(11, 0), best_se(11, 0);
    for (size_t t = 2; t <= 10; ++t) {
        for (size_t i = 0; i < combos; ++i) {
            Rng rng(split_seed(8, t * 1000000 + i));
            FourierQuery q{n, t, {}, {}, {}};
            for (size_t bit = 1; bit <= n; ++bit)
                if (rng.bit()) q.a.push_back(bit);
            for (size_t bit = 1; bit <= n; ++bit)
                if (rng.bit()) q.b.push_back(bit);
            for (size_t bit = 1; bit + 1 <= t; ++bit)
                if (rng.bit()) q.c.push_back(bit);
            FourierEstimate e = fourier_correlation(
                q, samples, split_seed(88, t * 1000000 + i));
            if (std::abs(e.estimate) > best[t]) {
                best[t] = std::abs(e.estimate);
                best_se[t] = e.stderr_;
            }
        }
    }
    bool monotone = true;
    for (size_t t = 3; t <= 10; ++t)
        monotone = monotone &&
                   best[t] <= best[t - 1] +
                                  4 * std::hypot(best_se[t], best_se[t - 1]);
    ok = ok && monotone;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "exact tiny case is 1/2; per-digit max |corr| %.3f .. %.3f "
                  "non-increasing within 4 sigma",
                  best[2], best[10]);
    report(8, ok, sw.secs(), 600, detail);
}

TEST_CASE("criterion 9: restrictions kill conjunctions, never parity") {
    Stopwatch sw;
    bool ok = true;
    for (size_t n = 2; n <= 16; ++n) {
        BoolFn f = and_fn(n);
        RestrictionSearchResult res =
            restriction_search(f, double(n - 1) / double(n), 100000, 9);
        ok = ok && res.found && res.best_stars >= n - 1 &&
             is_constant_on(f, res.best);
    }
    bool and_ok = ok;
    for (size_t n = 2; n <= 10; ++n) {
        RestrictionSearchResult res =
            restriction_search(parity_fn(n), 0.1, 100000, 9);
        ok = ok && !res.found && res.none_certified && res.best_stars == 0;
    }
    report(9, ok, sw.secs(), 60,
           std::string("conjunction killers found with N-1 stars (") +
               (and_ok ? "ok" : "BAD") +
               "), parity certified star-free exhaustively");
}

TEST_CASE("criterion 10: reachability traces, oracles and the sampler") {
    Stopwatch sw;
    bool ok = true;
    Rng vr(10);
    for (int i = 0; i < 1000 && ok; ++i) {
        size_t v = 5 + vr.below(31);
        uint64_t sub = split_seed(10, uint64_t(i));
        DagSample d;
        for (uint64_t redraw = 0;; ++redraw) {
            d = gen_dag(v, 0.5, split_seed(sub, redraw));
            if (!d.edges.empty()) break;
        }
        Rng qrng(split_seed(sub, 4242));
        QuerySample q = sample_query(d, qrng);
        ReachInstance inst{v, d.edges, q.query,
                           ReachInstance::Encoding::decimal};
        TokenTrace tr = cot_generate(ReachJob{inst});
        int truth = dfs_reachable(inst);
        ok = cot_verify_generic(ReachJob{inst}, tr).ok &&
             tr.tokens.back() == (truth ? "1" : "0") && q.label == truth;
    }
    bool trace_ok = ok;

    DagSample chain = chain3();
    std::map<std::pair<size_t, size_t>, size_t> counts;
    Rng rng(1010);
    const size_t draws = 100000;
    for (size_t i = 0; i < draws; ++i) ++counts[sample_query(chain, rng).query];
    std::map<std::pair<size_t, size_t>, double> expect = {
        {{0, 1}, 1.0 / 6}, {{0, 2}, 1.0 / 6}, {{1, 2}, 1.0 / 6},
        {{1, 0}, 1.0 / 8}, {{2, 1}, 1.0 / 8}, {{2, 0}, 1.0 / 4}};
    for (const auto& [pair, p] : expect) {
        double sigma = std::sqrt(double(draws) * p * (1 - p));
        ok = ok && std::abs(double(counts[pair]) - double(draws) * p) <=
                       3 * sigma;
    }
    report(10, ok, sw.secs(), 120,
           std::string("1000 random dags verified against a DFS oracle (") +
               (trace_ok ? "ok" : "BAD") +
               "), chain sampler matches 1/6, 1/8, 1/4 within 3 sigma");
}

TEST_CASE("criterion 11: byte-identical regeneration") {
    Stopwatch sw;
    Corpus p1 = gen_parity_corpus(6, 40, 25, 99, 2);
    Corpus p2 = gen_parity_corpus(6, 40, 25, 99, 2);
    Corpus r1 = gen_reach_corpus(4, 9, 25, 15, 99);
    Corpus r2 = gen_reach_corpus(4, 9, 25, 15, 99);
    Corpus m1 = gen_mult_corpus(5, 30, 20, 99);
    Corpus m2 = gen_mult_corpus(5, 30, 20, 99);
    Corpus d1 = gen_median_corpus(3, 50, 99);
    Corpus d2 = gen_median_corpus(3, 50, 99);
    bool ok = true;
    auto same = [&](const Corpus& a, const Corpus& b) {
        return corpus_text(a.train) == corpus_text(b.train) &&
               corpus_text(a.test) == corpus_text(b.test) &&
               a.manifest == b.manifest;
    };
    ok = ok && same(p1, p2) && same(r1, r2) && same(m1, m2) && same(d1, d2);

    Rng rng(11);
    Bits x = random_bits(9, rng), y = random_bits(9, rng);
    MultJob job{x, y, MultJob::Mode::ntt_butterflies};
    ok = ok && cot_generate(job).tokens == cot_generate(job).tokens;
    report(11, ok, sw.secs(), 60,
           "four corpora and a random trace regenerate byte-identically");
}
