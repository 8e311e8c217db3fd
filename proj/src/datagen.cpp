#include "cotlab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "cotlab/io.hpp"

namespace cotlab {

DagSample gen_dag(size_t vertices, double edge_prob, uint64_t seed) {
    if (vertices < 2)
        throw std::invalid_argument("need at least two vertices");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
        throw std::invalid_argument("edge probability must lie in [0, 1]");

    Rng rng(seed);
    DagSample d;
    d.vertices = vertices;
    for (size_t u = 1; u < vertices; ++u)
        for (size_t v = 0; v < u; ++v)
            if (rng.unit() < edge_prob) d.edges.push_back({u, v});

    std::vector<std::vector<size_t>> out(vertices);
    for (const auto& [u, v] : d.edges) out[u].push_back(v);
    d.dist.assign(vertices,
                  std::vector<size_t>(vertices, unreachable_distance));
    std::vector<size_t> queue;
    for (size_t src = 0; src < vertices; ++src) {
        auto& dist = d.dist[src];
        dist[src] = 0;
        queue.assign(1, src);
        for (size_t head = 0; head < queue.size(); ++head) {
            size_t u = queue[head];
            for (size_t v : out[u])
                if (dist[v] == unreachable_distance) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
        }
    }
    d.wl = wl_hash(vertices, d.edges);
    return d;
}

std::string wl_hash(size_t vertices,
                    const std::vector<std::pair<size_t, size_t>>& edges,
                    size_t rounds) {
    if (rounds == 0) rounds = vertices;
    std::vector<std::vector<size_t>> in(vertices), out(vertices);
    for (const auto& [u, v] : edges) {
        if (u >= vertices || v >= vertices)
            throw std::invalid_argument("edge endpoint out of range");
        out[u].push_back(v);
        in[v].push_back(u);
    }

    std::vector<uint64_t> label(vertices, fnv1a64("wl"));
    std::vector<uint64_t> next(vertices);
    for (size_t r = 0; r < rounds; ++r) {
        for (size_t v = 0; v < vertices; ++v) {
            std::vector<uint64_t> ins, outs;
            for (size_t u : in[v]) ins.push_back(label[u]);
            for (size_t u : out[v]) outs.push_back(label[u]);
            std::sort(ins.begin(), ins.end());
            std::sort(outs.begin(), outs.end());
            std::string blob = hex64(label[v]);
            blob += "|in";
            for (uint64_t l : ins) blob += hex64(l);
            blob += "|out";
            for (uint64_t l : outs) blob += hex64(l);
            next[v] = fnv1a64(blob);
        }
        label = next;
    }
    std::sort(label.begin(), label.end());
    std::string blob;
    for (uint64_t l : label) blob += hex64(l);
    return hex64(fnv1a64(blob));
}

QuerySample sample_query(const DagSample& dag, Rng& rng) {
    std::vector<std::pair<size_t, size_t>> unconnected;
    std::map<size_t, std::vector<std::pair<size_t, size_t>>> by_distance;
    for (size_t i = 0; i < dag.vertices; ++i)
        for (size_t j = 0; j < dag.vertices; ++j) {
            if (i == j) continue;
            size_t d = dag.dist[i][j];
            if (d == unreachable_distance)
                unconnected.push_back({i, j});
            else
                by_distance[d].push_back({i, j});
        }
    if (unconnected.empty() && by_distance.empty())
        throw std::logic_error("graph offers no query pairs");

    QuerySample q;
    bool connected;
    if (by_distance.empty()) {
        connected = false;
        q.degenerate = true;
    } else if (unconnected.empty()) {
        connected = true;
        q.degenerate = true;
    } else {
        connected = rng.bit();
    }
    if (connected) {
        auto it = by_distance.begin();
        std::advance(it, long(rng.below(by_distance.size())));
        const auto& bucket = it->second;
        q.query = bucket[rng.below(bucket.size())];
        q.label = 1;
        q.distance = it->first;
    } else {
        q.query = unconnected[rng.below(unconnected.size())];
        q.label = 0;
    }
    return q;
}

namespace {

nlohmann::json trace_line(const std::string& task, const CotJob& job,
                          nlohmann::json meta) {
    TokenTrace tr = cot_generate(job);
    return nlohmann::json{{"task", task},
                          {"input", join_tokens(tr.input())},
                          {"cot", join_tokens(tr.cot())},
                          {"answer", join_tokens(cot_answer(job))},
                          {"meta", std::move(meta)}};
}

nlohmann::json manifest_for(const std::string& task, uint64_t seed,
                            nlohmann::json params, const Corpus& corpus) {
    return nlohmann::json{
        {"task", task},
        {"seed", seed},
        {"params", std::move(params)},
        {"train",
         {{"count", corpus.train.size()},
          {"hash", hex64(fnv1a64(corpus_text(corpus.train)))}}},
        {"test",
         {{"count", corpus.test.size()},
          {"hash", hex64(fnv1a64(corpus_text(corpus.test)))}}}};
}

// sub-stream bases so train and test never share instance seeds
uint64_t test_stream(uint64_t seed) { return split_seed(seed, 1); }
uint64_t train_stream(uint64_t seed) { return split_seed(seed, 2); }

constexpr int max_redraws = 1000;

// Train slots depend only on their own derived seed plus the fixed test-key
// set, so they fill in parallel; slot order in the output stays by index.
template <typename Fn>
void fill_parallel(std::vector<nlohmann::json>& out, size_t count, Fn fn) {
    out.assign(count, nlohmann::json());
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < (long long)count; ++i) {
        try {
            out[size_t(i)] = fn(size_t(i));
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

// Draws `make` repeatedly until its key is fresh, up to the redraw cap.
// Used for test-split dedup and for keeping train inputs off the test set.
template <typename Make>
auto draw_fresh(Rng& rng, const std::set<std::string>& taken, Make make) {
    for (int attempt = 0; attempt < max_redraws; ++attempt) {
        auto [key, value] = make(rng);
        if (!taken.count(key)) return std::make_pair(key, value);
    }
    throw std::runtime_error("cannot draw enough distinct instances");
}

long double input_space(long double per_slot, size_t slots) {
    long double space = 1;
    for (size_t i = 0; i < slots; ++i) {
        space *= per_slot;
        if (space > 1e18L) return 1e18L;
    }
    return space;
}

Bits draw_bits(Rng& rng, size_t n) {
    Bits x(n);
    for (auto& b : x) b = int(rng.below(2));
    return x;
}

} // namespace

Corpus gen_median_corpus(size_t n, size_t train_count, uint64_t seed,
                         size_t stride, unsigned base, size_t digits) {
    if (n == 0) throw std::invalid_argument("need at least one number");
    MedianInstance probe{{}, base, digits, false};
    probe.numbers.assign(n, 0);
    probe.check();

    long long limit = 1;
    for (size_t i = 0; i < digits; ++i) limit *= base;
    size_t test_count = (n + 10) * 20;
    if ((long double)test_count > input_space((long double)limit, n))
        throw std::invalid_argument(
            "test split larger than the whole input space");

    auto make = [&](Rng& rng) {
        MedianInstance inst{{}, base, digits, false};
        inst.numbers.reserve(n);
        for (size_t i = 0; i < n; ++i)
            inst.numbers.push_back((long long)rng.below(uint64_t(limit)));
        std::string key;
        for (long long v : inst.numbers) key += std::to_string(v) + ",";
        return std::make_pair(key, inst);
    };

    Corpus corpus;
    std::set<std::string> test_keys;
    for (size_t i = 0; i < test_count; ++i) {
        Rng rng(split_seed(test_stream(seed), i));
        auto [key, inst] = draw_fresh(rng, test_keys, make);
        test_keys.insert(key);
        corpus.test.push_back(trace_line(
            "median", MedianJob{inst, stride},
            {{"index", i}, {"n", n}, {"base", base}, {"digits", digits},
             {"stride", stride}}));
    }
    fill_parallel(corpus.train, train_count, [&](size_t i) {
        Rng rng(split_seed(train_stream(seed), i));
        MedianInstance inst = draw_fresh(rng, test_keys, make).second;
        return trace_line(
            "median", MedianJob{inst, stride},
            {{"index", i}, {"n", n}, {"base", base}, {"digits", digits},
             {"stride", stride}});
    });
    corpus.manifest = manifest_for(
        "median", seed,
        {{"n", n}, {"base", base}, {"digits", digits}, {"stride", stride},
         {"train_count", train_count}, {"test_count", test_count}},
        corpus);
    return corpus;
}

Corpus gen_parity_corpus(size_t n, size_t train_count, size_t test_count,
                         uint64_t seed, size_t stride) {
    if (n == 0) throw std::invalid_argument("need at least one bit");
    if ((long double)test_count > input_space(2.0L, n))
        throw std::invalid_argument(
            "test split larger than the whole input space");

    auto make = [&](Rng& rng) {
        Bits x = draw_bits(rng, n);
        return std::make_pair(bits_render(x), x);
    };

    Corpus corpus;
    std::set<std::string> test_keys;
    for (size_t i = 0; i < test_count; ++i) {
        Rng rng(split_seed(test_stream(seed), i));
        auto [key, x] = draw_fresh(rng, test_keys, make);
        test_keys.insert(key);
        corpus.test.push_back(trace_line(
            "parity", ParityJob{x, stride},
            {{"index", i}, {"n", n}, {"stride", stride}}));
    }
    fill_parallel(corpus.train, train_count, [&](size_t i) {
        Rng rng(split_seed(train_stream(seed), i));
        Bits x = draw_fresh(rng, test_keys, make).second;
        return trace_line("parity", ParityJob{x, stride},
                          {{"index", i}, {"n", n}, {"stride", stride}});
    });
    corpus.manifest = manifest_for("parity", seed,
                                   {{"n", n}, {"stride", stride},
                                    {"train_count", train_count},
                                    {"test_count", test_count}},
                                   corpus);
    return corpus;
}

namespace {

std::string mode_name(MultJob::Mode mode) {
    switch (mode) {
    case MultJob::Mode::schoolbook: return "schoolbook";
    case MultJob::Mode::ntt_compact: return "ntt-compact";
    case MultJob::Mode::ntt_butterflies:
    default: return "ntt-butterflies";
    }
}

} // namespace

Corpus gen_mult_corpus(size_t n, size_t train_count, size_t test_count,
                       uint64_t seed, MultJob::Mode mode) {
    if (n == 0) throw std::invalid_argument("need at least one digit");
    if ((long double)test_count > input_space(4.0L, n))
        throw std::invalid_argument(
            "test split larger than the whole input space");

    auto make = [&](Rng& rng) {
        std::pair<Bits, Bits> ops{draw_bits(rng, n), draw_bits(rng, n)};
        return std::make_pair(
            bits_render(ops.first) + "|" + bits_render(ops.second), ops);
    };
    NttPlan plan = ntt_plan(mult_ntt_length(n));
    auto line = [&](const std::pair<Bits, Bits>& ops, size_t i) {
        MultJob job{ops.first, ops.second, mode};
        return trace_line("mult", job,
                          {{"index", i}, {"n", n}, {"mode", mode_name(mode)},
                           {"transform_length", plan.n}, {"p", plan.p},
                           {"omega", plan.omega}});
    };

    Corpus corpus;
    std::set<std::string> test_keys;
    for (size_t i = 0; i < test_count; ++i) {
        Rng rng(split_seed(test_stream(seed), i));
        auto [key, ops] = draw_fresh(rng, test_keys, make);
        test_keys.insert(key);
        corpus.test.push_back(line(ops, i));
    }
    fill_parallel(corpus.train, train_count, [&](size_t i) {
        Rng rng(split_seed(train_stream(seed), i));
        return line(draw_fresh(rng, test_keys, make).second, i);
    });
    corpus.manifest = manifest_for("mult", seed,
                                   {{"n", n}, {"mode", mode_name(mode)},
                                    {"train_count", train_count},
                                    {"test_count", test_count}},
                                   corpus);
    return corpus;
}

Corpus gen_reach_corpus(size_t v_min, size_t v_max, size_t train_count,
                        size_t test_count, uint64_t seed,
                        ReachInstance::Encoding encoding, double edge_prob) {
    if (v_min < 2 || v_max < v_min)
        throw std::invalid_argument("bad vertex count range");

    // One emitted instance: a non-empty DAG whose fingerprint avoids
    // `taken`, a sampled query, and a relabeling that hides the canonical
    // topological order. Returns the fingerprint as the dedup key.
    auto make = [&](Rng& rng) {
        for (int attempt = 0;; ++attempt) {
            if (attempt >= max_redraws)
                throw std::runtime_error(
                    "cannot draw enough distinct graphs");
            size_t v = v_min + rng.below(v_max - v_min + 1);
            DagSample dag = gen_dag(v, edge_prob, rng.next());
            if (dag.edges.empty()) continue;
            return std::make_pair(dag.wl, dag);
        }
    };

    auto line = [&](const DagSample& dag, Rng& rng, size_t i) {
        QuerySample q = sample_query(dag, rng);
        std::vector<size_t> relabel(dag.vertices);
        for (size_t v = 0; v < dag.vertices; ++v) relabel[v] = v;
        rng.shuffle(relabel);

        ReachInstance inst;
        inst.vertices = dag.vertices;
        inst.encoding = encoding;
        for (const auto& [u, v] : dag.edges)
            inst.edges.push_back({relabel[u], relabel[v]});
        std::sort(inst.edges.begin(), inst.edges.end());
        inst.query = {relabel[q.query.first], relabel[q.query.second]};

        nlohmann::json meta{{"index", i},
                            {"vertices", dag.vertices},
                            {"edge_count", dag.edges.size()},
                            {"label", q.label},
                            {"degenerate", q.degenerate},
                            {"wl", dag.wl},
                            {"encoding",
                             encoding == ReachInstance::Encoding::binary
                                 ? "binary"
                                 : "decimal"}};
        meta["distance"] = q.label
                               ? nlohmann::json(q.distance)
                               : nlohmann::json(nullptr);
        return trace_line("reach", ReachJob{inst}, std::move(meta));
    };

    Corpus corpus;
    std::set<std::string> test_hashes;
    for (size_t i = 0; i < test_count; ++i) {
        Rng rng(split_seed(test_stream(seed), i));
        auto [wl, dag] = draw_fresh(rng, test_hashes, make);
        test_hashes.insert(wl);
        corpus.test.push_back(line(dag, rng, i));
    }
    fill_parallel(corpus.train, train_count, [&](size_t i) {
        Rng rng(split_seed(train_stream(seed), i));
        DagSample dag = draw_fresh(rng, test_hashes, make).second;
        return line(dag, rng, i);
    });
    corpus.manifest = manifest_for(
        "reach", seed,
        {{"v_min", v_min}, {"v_max", v_max}, {"edge_prob", edge_prob},
         {"encoding",
          encoding == ReachInstance::Encoding::binary ? "binary" : "decimal"},
         {"train_count", train_count}, {"test_count", test_count}},
        corpus);
    return corpus;
}

std::string corpus_text(const std::vector<nlohmann::json>& lines) {
    std::string out;
    for (const auto& line : lines) {
        out += line.dump();
        out += '\n';
    }
    return out;
}

TokenTrace corpus_line_trace(const nlohmann::json& line) {
    TokenTrace tr;
    tr.tokens = split_tokens(line.at("input").get<std::string>());
    tr.input_len = tr.tokens.size();
    for (const auto& t :
         split_tokens(line.at("cot").get<std::string>()))
        tr.tokens.push_back(t);
    tr.check();
    return tr;
}

namespace {

Bits bits_at(const std::vector<std::string>& tokens, size_t begin,
             size_t count) {
    Bits out;
    for (size_t i = begin; i < begin + count; ++i) {
        const std::string& t = tokens.at(i);
        if (t != "0" && t != "1")
            throw std::invalid_argument("expected a bit token, got " + t);
        out.push_back(t == "1");
    }
    return out;
}

MultJob::Mode mode_from_name(const std::string& name) {
    if (name == "schoolbook") return MultJob::Mode::schoolbook;
    if (name == "ntt-compact") return MultJob::Mode::ntt_compact;
    if (name == "ntt-butterflies") return MultJob::Mode::ntt_butterflies;
    throw std::invalid_argument("unknown mult mode: " + name);
}

} // namespace

CotJob cot_job_from_line(const nlohmann::json& line) {
    const std::string task = line.at("task").get<std::string>();
    const nlohmann::json& meta = line.at("meta");
    TokenTrace tr = corpus_line_trace(line);

    if (task == "parity") {
        ParityJob job;
        job.x = bits_at(tr.tokens, 0, tr.input_len);
        job.stride = meta.at("stride").get<size_t>();
        return job;
    }
    if (task == "dfa") {
        DfaJob job;
        job.dfa = dfa_parity();
        for (size_t i = 0; i < tr.input_len; ++i)
            job.word.push_back(tr.tokens[i]);
        return job;
    }
    if (task == "mult") {
        std::vector<size_t> seps;
        for (size_t i = 0; i < tr.input_len; ++i)
            if (tr.tokens[i] == "-1") seps.push_back(i);
        if (seps.size() != 3 || seps[0] != 0 || seps[2] + 1 != tr.input_len)
            throw std::invalid_argument("malformed mult input section");
        MultJob job;
        job.x = bits_at(tr.tokens, seps[0] + 1, seps[1] - seps[0] - 1);
        job.y = bits_at(tr.tokens, seps[1] + 1, seps[2] - seps[1] - 1);
        job.mode = mode_from_name(meta.at("mode").get<std::string>());
        return job;
    }
    if (task == "median") {
        MedianInstance inst;
        inst.base = meta.at("base").get<unsigned>();
        inst.digits = meta.at("digits").get<size_t>();
        size_t i = 1;
        while (i < tr.input_len && tr.tokens.at(i) != "SEP") {
            long long v = 0;
            for (size_t d = 0; d < inst.digits; ++d, ++i)
                v = v * inst.base +
                    std::stoll(tr.tokens.at(i));
            if (tr.tokens.at(i) != ";")
                throw std::invalid_argument(
                    "malformed median input section");
            ++i;
            inst.numbers.push_back(v);
        }
        return MedianJob{inst, meta.at("stride").get<size_t>()};
    }
    if (task == "reach") {
        ReachInstance inst;
        inst.vertices = meta.at("vertices").get<size_t>();
        bool binary = meta.at("encoding").get<std::string>() == "binary";
        inst.encoding = binary ? ReachInstance::Encoding::binary
                               : ReachInstance::Encoding::decimal;
        size_t width = binary ? reach_vertex_bits(inst.vertices) : 1;
        auto vertex_at = [&](size_t i) -> size_t {
            if (binary) return u64_from_bits(bits_at(tr.tokens, i, width));
            return std::stoull(tr.tokens.at(i));
        };
        size_t i = 1;
        while (i < tr.input_len && tr.tokens.at(i) != "QUERY1") {
            size_t u = vertex_at(i);
            size_t v = vertex_at(i + width);
            if (tr.tokens.at(i + 2 * width) != ";")
                throw std::invalid_argument(
                    "malformed reach input section");
            inst.edges.push_back({u, v});
            i += 2 * width + 1;
        }
        inst.query.first = vertex_at(i + 1);
        inst.query.second = vertex_at(i + 2 + width);
        return ReachJob{inst};
    }
    throw std::invalid_argument("unknown task in corpus line: " + task);
}

} // namespace cotlab
