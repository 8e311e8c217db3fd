#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cotlab/cot_tasks.hpp"
#include "cotlab/rng.hpp"

namespace cotlab {

inline constexpr size_t unreachable_distance = size_t(-1);

// A DAG in canonical form: vertices 0..V-1 with every edge running from a
// higher to a lower index, which makes acyclicity structural. Corpus
// emission hides the canonical order behind a seeded relabeling.
struct DagSample {
    size_t vertices = 0;
    std::vector<std::pair<size_t, size_t>> edges;
    std::vector<std::vector<size_t>> dist; // dist[u][v], directed shortest
                                           // path, unreachable_distance if none
    std::string wl; // isomorphism-invariant fingerprint
};

// Bernoulli(edge_prob) on every lower-triangle adjacency cell
DagSample gen_dag(size_t vertices, double edge_prob, uint64_t seed);

// Directed Weisfeiler-Lehman fingerprint: each round rehashes a vertex from
// its label and the sorted label multisets of its in and out neighbors;
// the digest hashes the sorted final labels. rounds defaults to V.
std::string wl_hash(size_t vertices,
                    const std::vector<std::pair<size_t, size_t>>& edges,
                    size_t rounds = 0);

struct QuerySample {
    std::pair<size_t, size_t> query{0, 0};
    int label = 0;
    size_t distance = unreachable_distance; // set when label is 1
    bool degenerate = false; // one side was empty, fell back to the other
};

// Label 0 with probability 1/2, uniform over ordered unconnected pairs;
// label 1 with probability 1/2, picking a distance uniformly and then a
// pair uniformly inside that distance bucket. Pairs (i, i) never appear.
QuerySample sample_query(const DagSample& dag, Rng& rng);

// A generated split pair. Lines are JSON objects
//   {"task", "input", "cot", "answer", "meta"}
// with token sequences rendered as space-separated strings; the manifest
// records the seed, the parameters, and a content hash per split.
struct Corpus {
    nlohmann::json manifest;
    std::vector<nlohmann::json> train, test;
};

// numbers drawn from {0 .. base^digits - 1} with replacement; the test split
// holds (n + 10) * 20 distinct inputs and the train split avoids them
Corpus gen_median_corpus(size_t n, size_t train_count, uint64_t seed,
                         size_t stride = 1, unsigned base = 10,
                         size_t digits = 3);

// uniform n-bit words; test inputs are distinct and never appear in train
Corpus gen_parity_corpus(size_t n, size_t train_count, size_t test_count,
                         uint64_t seed, size_t stride = 1);

// uniform n-bit operand pairs, same split discipline as above
Corpus gen_mult_corpus(size_t n, size_t train_count, size_t test_count,
                       uint64_t seed,
                       MultJob::Mode mode = MultJob::Mode::ntt_compact);

// Random DAGs with vertex counts uniform in [v_min, v_max] and one sampled
// query each; edgeless draws are rejected. The train and test splits share
// no Weisfeiler-Lehman hash; vertex labels are shuffled per instance before
// encoding so the canonical edge orientation never shows.
Corpus gen_reach_corpus(size_t v_min, size_t v_max, size_t train_count,
                        size_t test_count, uint64_t seed,
                        ReachInstance::Encoding encoding =
                            ReachInstance::Encoding::decimal,
                        double edge_prob = 0.5);

// one line per split entry, each dumped on its own line
std::string corpus_text(const std::vector<nlohmann::json>& lines);

// reconstructs the trace of one corpus line
TokenTrace corpus_line_trace(const nlohmann::json& line);

// Rebuilds the generation job of a corpus line from its task name, meta,
// and input section, so the line can be re-verified with nothing but the
// line itself. Rejects tasks outside the corpus schema.
CotJob cot_job_from_line(const nlohmann::json& line);

} // namespace cotlab
