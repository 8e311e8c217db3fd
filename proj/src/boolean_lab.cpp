#include "cotlab/boolean_lab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cotlab/rng.hpp"

namespace cotlab {

namespace {

constexpr size_t kExactArityCap = 24;

void check_arity(const BoolFn& f, size_t cap) {
    if (f.arity == 0 || f.arity > cap)
        throw std::length_error("arity out of range for " + f.name);
}

uint64_t flip(uint64_t x, size_t i) { return x ^ (uint64_t(1) << i); }

// mean and normal-approx standard error over per-input estimates
SampledSensitivity summarize(const std::vector<double>& per_input,
                             size_t n_flips) {
    SampledSensitivity out;
    out.n_inputs = per_input.size();
    out.n_flips = n_flips;
    double sum = 0;
    for (double v : per_input) sum += v;
    out.estimate = sum / double(per_input.size());
    double sq = 0;
    for (double v : per_input) sq += (v - out.estimate) * (v - out.estimate);
    size_t n = per_input.size();
    if (n > 1) out.stderr_ = std::sqrt(sq / double(n - 1) / double(n));
    return out;
}

double sampled_one_input(const BoolFn& f, size_t n_flips, Rng& rng) {
    uint64_t mask = f.arity == 64 ? ~uint64_t(0)
                                  : ((uint64_t(1) << f.arity) - 1);
    uint64_t x = rng.next() & mask;
    int fx = f.eval(x);
    size_t changed = 0;
    for (size_t t = 0; t < n_flips; ++t) {
        size_t pos = rng.below(f.arity);
        if (f.eval(flip(x, pos)) != fx) ++changed;
    }
    return double(f.arity) * double(changed) / double(n_flips);
}

} // namespace

BoolFn parity_fn(size_t n) {
    if (n == 0 || n > 64) throw std::length_error("parity arity out of range");
    return BoolFn{n, "parity_" + std::to_string(n), [](uint64_t x) {
                      return int(__builtin_parityll(x));
                  }};
}

BoolFn and_fn(size_t n) {
    if (n == 0 || n > 64) throw std::length_error("and arity out of range");
    uint64_t mask = n == 64 ? ~uint64_t(0) : ((uint64_t(1) << n) - 1);
    return BoolFn{n, "and_" + std::to_string(n), [mask](uint64_t x) {
                      return int((x & mask) == mask);
                  }};
}

BoolFn mult_digit_fn(size_t n_bits, size_t k) {
    if (n_bits == 0 || n_bits > 16)
        throw std::length_error("operand width out of range");
    if (k < 1 || k > 2 * n_bits)
        throw std::invalid_argument("product digit index out of range");
    uint64_t mask = (uint64_t(1) << n_bits) - 1;
    return BoolFn{2 * n_bits,
                  "mult" + std::to_string(n_bits) + "_digit" +
                      std::to_string(k),
                  [n_bits, k, mask](uint64_t xy) {
                      uint64_t x = xy & mask;
                      uint64_t y = (xy >> n_bits) & mask;
                      return int((x * y >> (k - 1)) & 1);
                  }};
}

int sensitivity_at(const BoolFn& f, uint64_t x) {
    int fx = f.eval(x);
    int s = 0;
    for (size_t i = 0; i < f.arity; ++i)
        if (f.eval(flip(x, i)) != fx) ++s;
    return s;
}

Rat avg_sensitivity_exact_serial(const BoolFn& f) {
    check_arity(f, kExactArityCap);
    long long total = 0;
    uint64_t count = uint64_t(1) << f.arity;
    for (uint64_t x = 0; x < count; ++x) total += sensitivity_at(f, x);
    return Rat(total, (long long)count);
}

Rat avg_sensitivity_exact(const BoolFn& f) {
    check_arity(f, kExactArityCap);
    uint64_t count = uint64_t(1) << f.arity;
    long long total = 0;
#pragma omp parallel for reduction(+ : total) schedule(static)
    for (long long x = 0; x < (long long)count; ++x)
        total += sensitivity_at(f, uint64_t(x));
    return Rat(total, (long long)count);
}

SampledSensitivity avg_sensitivity_sampled_serial(const BoolFn& f,
                                                  size_t n_inputs,
                                                  size_t n_flips,
                                                  uint64_t seed) {
    check_arity(f, 64);
    if (n_inputs == 0 || n_flips == 0)
        throw std::invalid_argument("sample counts must be positive");
    std::vector<double> per_input(n_inputs);
    for (size_t i = 0; i < n_inputs; ++i) {
        Rng rng(split_seed(seed, i));
        per_input[i] = sampled_one_input(f, n_flips, rng);
    }
    return summarize(per_input, n_flips);
}

SampledSensitivity avg_sensitivity_sampled(const BoolFn& f, size_t n_inputs,
                                           size_t n_flips, uint64_t seed) {
    check_arity(f, 64);
    if (n_inputs == 0 || n_flips == 0)
        throw std::invalid_argument("sample counts must be positive");
    std::vector<double> per_input(n_inputs);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n_inputs; ++i) {
        Rng rng(split_seed(seed, uint64_t(i)));
        per_input[size_t(i)] = sampled_one_input(f, n_flips, rng);
    }
    return summarize(per_input, n_flips);
}

namespace {

// one operand pair's contribution: which product digits each flip toggles
void mult_pair_counts(uint64_t x, uint64_t y, size_t n, uint64_t* counts) {
    uint64_t p = x * y;
    for (size_t i = 0; i < 2 * n; ++i) {
        uint64_t p2 = i < n ? (x ^ (uint64_t(1) << i)) * y
                            : x * (y ^ (uint64_t(1) << (i - n)));
        uint64_t diff = p ^ p2;
        while (diff) {
            counts[__builtin_ctzll(diff)] += 1;
            diff &= diff - 1;
        }
    }
}

} // namespace

std::vector<Rat> mult_digit_avg_sensitivity_exact_serial(size_t n_bits) {
    if (n_bits == 0 || n_bits > 10)
        throw std::length_error("operand width out of range for exact sweep");
    size_t n = n_bits;
    uint64_t side = uint64_t(1) << n;
    std::vector<uint64_t> counts(2 * n, 0);
    for (uint64_t x = 0; x < side; ++x)
        for (uint64_t y = 0; y < side; ++y)
            mult_pair_counts(x, y, n, counts.data());
    std::vector<Rat> out;
    out.reserve(2 * n);
    for (size_t k = 0; k < 2 * n; ++k)
        out.push_back(Rat((long long)counts[k], (long long)(side * side)));
    return out;
}

std::vector<Rat> mult_digit_avg_sensitivity_exact(size_t n_bits) {
    if (n_bits == 0 || n_bits > 10)
        throw std::length_error("operand width out of range for exact sweep");
    size_t n = n_bits;
    uint64_t side = uint64_t(1) << n;
    std::vector<uint64_t> counts(2 * n, 0);
#pragma omp parallel
    {
        std::vector<uint64_t> local(2 * n, 0);
#pragma omp for schedule(static) nowait
        for (long long x = 0; x < (long long)side; ++x)
            for (uint64_t y = 0; y < side; ++y)
                mult_pair_counts(uint64_t(x), y, n, local.data());
#pragma omp critical
        for (size_t k = 0; k < 2 * n; ++k) counts[k] += local[k];
    }
    std::vector<Rat> out;
    out.reserve(2 * n);
    for (size_t k = 0; k < 2 * n; ++k)
        out.push_back(Rat((long long)counts[k], (long long)(side * side)));
    return out;
}

namespace {

int median_last_bit(std::vector<uint32_t>& scratch) {
    size_t mid = scratch.size() / 2; // (floor(N/2)+1)-th smallest, 0-indexed
    std::nth_element(scratch.begin(), scratch.begin() + long(mid),
                     scratch.end());
    return int(scratch[mid] & 1);
}

double median_one_input(size_t n_numbers, size_t b_bits, size_t n_flips,
                        Rng& rng) {
    std::vector<uint32_t> nums(n_numbers);
    for (auto& v : nums) v = uint32_t(rng.below(uint64_t(1) << b_bits));
    std::vector<uint32_t> scratch = nums;
    int base = median_last_bit(scratch);
    size_t changed = 0;
    size_t arity = n_numbers * b_bits;
    for (size_t t = 0; t < n_flips; ++t) {
        size_t pos = rng.below(arity);
        size_t j = pos / b_bits;
        uint32_t bit = uint32_t(1) << (pos % b_bits);
        scratch = nums;
        scratch[j] ^= bit;
        if (median_last_bit(scratch) != base) ++changed;
    }
    return double(arity) * double(changed) / double(n_flips);
}

} // namespace

SampledSensitivity median_lastdigit_sensitivity_serial(size_t n_numbers,
                                                       size_t b_bits,
                                                       size_t n_inputs,
                                                       size_t n_flips,
                                                       uint64_t seed) {
    if (n_numbers == 0 || b_bits == 0 || b_bits > 31)
        throw std::invalid_argument("bad median sensitivity parameters");
    std::vector<double> per_input(n_inputs);
    for (size_t i = 0; i < n_inputs; ++i) {
        Rng rng(split_seed(seed, i));
        per_input[i] = median_one_input(n_numbers, b_bits, n_flips, rng);
    }
    return summarize(per_input, n_flips);
}

SampledSensitivity median_lastdigit_sensitivity(size_t n_numbers,
                                                size_t b_bits,
                                                size_t n_inputs,
                                                size_t n_flips,
                                                uint64_t seed) {
    if (n_numbers == 0 || b_bits == 0 || b_bits > 31)
        throw std::invalid_argument("bad median sensitivity parameters");
    std::vector<double> per_input(n_inputs);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n_inputs; ++i) {
        Rng rng(split_seed(seed, uint64_t(i)));
        per_input[size_t(i)] =
            median_one_input(n_numbers, b_bits, n_flips, rng);
    }
    return summarize(per_input, n_flips);
}

namespace {

void check_query(const FourierQuery& q) {
    if (q.n_bits == 0 || q.n_bits > 16)
        throw std::length_error("operand width out of range");
    if (q.t < 1 || q.t > 2 * q.n_bits)
        throw std::invalid_argument("target digit out of range");
    for (size_t i : q.a)
        if (i < 1 || i > q.n_bits)
            throw std::invalid_argument("A index out of range");
    for (size_t j : q.b)
        if (j < 1 || j > q.n_bits)
            throw std::invalid_argument("B index out of range");
    for (size_t k : q.c)
        if (k < 1 || k >= q.t)
            throw std::invalid_argument("C index must precede target digit");
}

// signed +-1 term for one operand pair
int fourier_term(const FourierQuery& q, uint64_t x, uint64_t y) {
    uint64_t m = x * y;
    int sign = 1;
    auto bit = [](uint64_t v, size_t idx1) {
        return int((v >> (idx1 - 1)) & 1);
    };
    if (!bit(m, q.t)) sign = -sign;
    for (size_t i : q.a)
        if (!bit(x, i)) sign = -sign;
    for (size_t j : q.b)
        if (!bit(y, j)) sign = -sign;
    for (size_t k : q.c)
        if (!bit(m, k)) sign = -sign;
    return sign;
}

FourierEstimate fourier_from_sum(long long sum, size_t samples) {
    FourierEstimate out;
    out.samples = samples;
    out.estimate = double(sum) / double(samples);
    double var = 1.0 - out.estimate * out.estimate;
    if (var < 0) var = 0;
    out.stderr_ = std::sqrt(var / double(samples));
    return out;
}

int fourier_sample_term(const FourierQuery& q, uint64_t seed, uint64_t i) {
    Rng rng(split_seed(seed, i));
    uint64_t mask = (uint64_t(1) << q.n_bits) - 1;
    uint64_t x = rng.next() & mask;
    uint64_t y = rng.next() & mask;
    return fourier_term(q, x, y);
}

} // namespace

FourierEstimate fourier_correlation_serial(const FourierQuery& q,
                                           size_t samples, uint64_t seed) {
    check_query(q);
    if (samples == 0) throw std::invalid_argument("need at least one sample");
    long long sum = 0;
    for (size_t i = 0; i < samples; ++i)
        sum += fourier_sample_term(q, seed, i);
    return fourier_from_sum(sum, samples);
}

FourierEstimate fourier_correlation(const FourierQuery& q, size_t samples,
                                    uint64_t seed) {
    check_query(q);
    if (samples == 0) throw std::invalid_argument("need at least one sample");
    long long sum = 0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
    for (long long i = 0; i < (long long)samples; ++i)
        sum += fourier_sample_term(q, seed, uint64_t(i));
    return fourier_from_sum(sum, samples);
}

Rat fourier_correlation_exact(const FourierQuery& q) {
    check_query(q);
    if (q.n_bits > 8)
        throw std::length_error("exact correlation capped at 8-bit operands");
    uint64_t side = uint64_t(1) << q.n_bits;
    long long sum = 0;
    for (uint64_t x = 0; x < side; ++x)
        for (uint64_t y = 0; y < side; ++y) sum += fourier_term(q, x, y);
    return Rat(sum, (long long)(side * side));
}

size_t Restriction::stars() const {
    size_t s = 0;
    for (int v : assign)
        if (v < 0) ++s;
    return s;
}

Restriction Restriction::all_stars(size_t arity) {
    return Restriction{std::vector<int>(arity, -1)};
}

namespace {

void check_restriction(const BoolFn& f, const Restriction& rho) {
    if (rho.assign.size() != f.arity)
        throw std::invalid_argument("restriction arity mismatch");
    for (int v : rho.assign)
        if (v < -1 || v > 1)
            throw std::invalid_argument("restriction values must be 0/1/star");
}

uint64_t fixed_bits(const Restriction& rho) {
    uint64_t v = 0;
    for (size_t i = 0; i < rho.assign.size(); ++i)
        if (rho.assign[i] == 1) v |= uint64_t(1) << i;
    return v;
}

} // namespace

BoolFn restrict_apply(const BoolFn& f, const Restriction& rho) {
    check_restriction(f, rho);
    uint64_t fixed = fixed_bits(rho);
    std::vector<size_t> star_pos;
    for (size_t i = 0; i < rho.assign.size(); ++i)
        if (rho.assign[i] < 0) star_pos.push_back(i);
    auto inner = f.eval;
    return BoolFn{star_pos.size(), f.name + "|restricted",
                  [inner, fixed, star_pos](uint64_t x) {
                      uint64_t full = fixed;
                      for (size_t b = 0; b < star_pos.size(); ++b)
                          if ((x >> b) & 1) full |= uint64_t(1) << star_pos[b];
                      return inner(full);
                  }};
}

bool is_constant_on(const BoolFn& f, const Restriction& rho) {
    check_restriction(f, rho);
    std::vector<size_t> star_pos;
    for (size_t i = 0; i < rho.assign.size(); ++i)
        if (rho.assign[i] < 0) star_pos.push_back(i);
    if (star_pos.size() > kExactArityCap)
        throw std::length_error("too many stars for exact constancy check");
    uint64_t base = fixed_bits(rho);
    int first = -1;
    uint64_t combos = uint64_t(1) << star_pos.size();
    for (uint64_t c = 0; c < combos; ++c) {
        uint64_t x = base;
        for (size_t b = 0; b < star_pos.size(); ++b)
            if ((c >> b) & 1) x |= uint64_t(1) << star_pos[b];
        int v = f.eval(x);
        if (first < 0)
            first = v;
        else if (v != first)
            return false;
    }
    return true;
}

namespace {

std::vector<double> sampled_influence(const BoolFn& f, size_t samples,
                                      uint64_t seed) {
    std::vector<double> inf(f.arity, 0);
    uint64_t mask =
        f.arity == 64 ? ~uint64_t(0) : ((uint64_t(1) << f.arity) - 1);
    Rng rng(split_seed(seed, 0xb001));
    for (size_t s = 0; s < samples; ++s) {
        uint64_t x = rng.next() & mask;
        int fx = f.eval(x);
        for (size_t i = 0; i < f.arity; ++i)
            if (f.eval(flip(x, i)) != fx) inf[i] += 1;
    }
    return inf;
}

} // namespace

RestrictionSearchResult restriction_search(const BoolFn& f,
                                           double star_fraction,
                                           size_t budget, uint64_t seed) {
    check_arity(f, kExactArityCap);
    if (star_fraction <= 0 || star_fraction > 1)
        throw std::invalid_argument("star fraction must be in (0, 1]");
    const size_t n = f.arity;
    const size_t target =
        size_t(std::ceil(star_fraction * double(n) - 1e-9));
    RestrictionSearchResult res;
    // the fully fixed all-zeros point is trivially constant: stars = 0
    res.best = Restriction{std::vector<int>(n, 0)};

    auto consider = [&](const Restriction& rho) {
        ++res.candidates_tried;
        if (!is_constant_on(f, rho)) return false;
        size_t s = rho.stars();
        if (s > res.best_stars) {
            res.best = rho;
            res.best_stars = s;
        }
        if (s >= target) res.found = true;
        return true;
    };

    // exhaustive single-star sweep when it fits: proves or refutes the
    // existence of any constancy-forcing restriction with at least one star
    if (n <= 20 && n * (uint64_t(1) << (n - 1)) <= budget) {
        bool any = false;
        for (size_t s = 0; s < n && res.candidates_tried < budget; ++s) {
            uint64_t combos = uint64_t(1) << (n - 1);
            for (uint64_t c = 0; c < combos; ++c) {
                Restriction rho = Restriction::all_stars(n);
                size_t b = 0;
                for (size_t i = 0; i < n; ++i) {
                    if (i == s) continue;
                    rho.assign[i] = int((c >> b) & 1);
                    ++b;
                }
                if (consider(rho)) any = true;
            }
        }
        if (!any) {
            res.none_certified = true;
            return res;
        }
    }

    // greedy: fix sampled-influence-heavy positions first, choosing the
    // value that leaves the sampled completions closest to constant
    std::vector<double> inf = sampled_influence(f, 128, seed);
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return inf[a] > inf[b]; });
    Rng grng(split_seed(seed, 0x9eed));
    Restriction greedy = Restriction::all_stars(n);
    for (size_t step = 0; step + target < n && res.candidates_tried < budget;
         ++step) {
        size_t pos = order[step];
        int best_val = 0;
        double best_score = -1;
        for (int val = 0; val <= 1; ++val) {
            greedy.assign[pos] = val;
            BoolFn g = restrict_apply(f, greedy);
            uint64_t mask = g.arity == 64 ? ~uint64_t(0)
                                          : ((uint64_t(1) << g.arity) - 1);
            size_t ones = 0, samples = 64;
            for (size_t t = 0; t < samples; ++t)
                ones += size_t(g.eval(grng.next() & mask));
            double maj =
                std::max(double(ones), double(samples - ones)) / samples;
            if (maj > best_score) {
                best_score = maj;
                best_val = val;
            }
        }
        greedy.assign[pos] = best_val;
        if (consider(greedy) && greedy.stars() >= target) return res;
    }

    // randomized fill: restrictions with exactly `target` stars
    Rng rng(split_seed(seed, 0xf111));
    while (res.candidates_tried < budget) {
        Restriction rho = Restriction::all_stars(n);
        std::vector<size_t> pos(n);
        for (size_t i = 0; i < n; ++i) pos[i] = i;
        rng.shuffle(pos);
        for (size_t i = 0; i < n - target; ++i)
            rho.assign[pos[i]] = int(rng.bit());
        if (consider(rho) && rho.stars() >= target) return res;
        if (target == n) break; // all-stars is the only such candidate
    }
    return res;
}

} // namespace cotlab
