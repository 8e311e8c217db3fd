// Compares each parallel kernel against its serial twin on a fixed workload
// and verifies they produce identical results, which the split-seed design
// guarantees regardless of thread count.
#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cstdio>
#include <functional>

#include "cotlab/boolean_lab.hpp"
#include "cotlab/rng.hpp"

using namespace cotlab;

namespace {

template <typename F>
auto timed(F&& f, double& secs) {
    auto start = std::chrono::steady_clock::now();
    auto result = f();
    secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
               .count();
    return result;
}

template <typename F>
void row(const char* name, F&& serial_fn, F&& parallel_fn) {
    double ts = 0, tp = 0;
    auto a = timed(serial_fn, ts);
    auto b = timed(parallel_fn, tp);
    std::printf("%-38s %9.3f s %9.3f s %7.2fx  %s\n", name, ts, tp, ts / tp,
                a == b ? "identical" : "MISMATCH");
}

// fast keyed mixer, an arbitrary dense function with no exploitable shape
BoolFn scrambled_fn(size_t arity) {
    return BoolFn{arity, "scrambled", [](uint64_t x) {
                      x = mix64(x * 0x9e3779b97f4a7c15ull + 1);
                      return int(x & 1);
                  }};
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled at build time\n");
#endif
    std::printf("%-38s %11s %11s %8s\n", "kernel", "serial", "parallel",
                "speedup");

    BoolFn dense = scrambled_fn(22);
    row(
        "avg_sensitivity_exact (n=22)",
        std::function<Rat()>([&] { return avg_sensitivity_exact_serial(dense); }),
        std::function<Rat()>([&] { return avg_sensitivity_exact(dense); }));

    BoolFn wide = scrambled_fn(48);
    using Sampled = SampledSensitivity;
    auto same_sampled = [](const Sampled& a, const Sampled& b) {
        return a.estimate == b.estimate && a.stderr_ == b.stderr_;
    };
    {
        double ts = 0, tp = 0;
        Sampled a = timed(
            [&] { return avg_sensitivity_sampled_serial(wide, 50000, 100, 7); },
            ts);
        Sampled b = timed(
            [&] { return avg_sensitivity_sampled(wide, 50000, 100, 7); }, tp);
        std::printf("%-38s %9.3f s %9.3f s %7.2fx  %s\n",
                    "avg_sensitivity_sampled (n=48)", ts, tp, ts / tp,
                    same_sampled(a, b) ? "identical" : "MISMATCH");
    }

    row(
        "mult_digit_avg_sensitivity (N=9)",
        std::function<std::vector<Rat>()>(
            [] { return mult_digit_avg_sensitivity_exact_serial(9); }),
        std::function<std::vector<Rat>()>(
            [] { return mult_digit_avg_sensitivity_exact(9); }));

    {
        double ts = 0, tp = 0;
        Sampled a = timed(
            [] { return median_lastdigit_sensitivity_serial(64, 7, 2000, 500, 7); },
            ts);
        Sampled b = timed(
            [] { return median_lastdigit_sensitivity(64, 7, 2000, 500, 7); },
            tp);
        std::printf("%-38s %9.3f s %9.3f s %7.2fx  %s\n",
                    "median_lastdigit_sensitivity (N=64)", ts, tp, ts / tp,
                    same_sampled(a, b) ? "identical" : "MISMATCH");
    }

    {
        FourierQuery q{16, 8, {1, 5, 9}, {2, 6}, {3, 7}};
        double ts = 0, tp = 0;
        FourierEstimate a =
            timed([&] { return fourier_correlation_serial(q, 5000000, 7); }, ts);
        FourierEstimate b =
            timed([&] { return fourier_correlation(q, 5000000, 7); }, tp);
        std::printf("%-38s %9.3f s %9.3f s %7.2fx  %s\n",
                    "fourier_correlation (5e6 samples)", ts, tp, ts / tp,
                    (a.estimate == b.estimate && a.stderr_ == b.stderr_)
                        ? "identical"
                        : "MISMATCH");
    }
    return 0;
}
