#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cotlab/bitstring.hpp"
#include "cotlab/ntt.hpp"
#include "cotlab/trace.hpp"

namespace cotlab {

// Verdict shared by the trace verifiers. bad_token is the index of the first
// offending token within the full trace (SIZE_MAX when the problem is a
// missing or extra token rather than a wrong one); detail is human-readable.
struct CotVerdict {
    bool ok = true;
    std::string detail;
    size_t bad_token = size_t(-1);

    static CotVerdict fail(std::string why, size_t at = size_t(-1)) {
        return CotVerdict{false, std::move(why), at};
    }
};

// ---- parity ---------------------------------------------------------------

int parity_oracle(const Bits& x);

// Trace layout: the input bits, then the parity of each prefix whose length
// is a multiple of stride, then "#", then the answer bit. stride 1 gives the
// full prefix-parity scratchpad of N+1 tokens after the input.
TokenTrace parity_cot(const Bits& x, size_t stride = 1);

CotVerdict parity_cot_verify(const Bits& x, size_t stride,
                             const TokenTrace& trace);

// ---- deterministic finite automata ----------------------------------------

// The parity scratchpad generalizes to any regular language: stream the
// automaton state after each prefix, then emit the membership bit.
struct Dfa {
    std::vector<std::string> states;
    std::vector<std::string> alphabet;
    std::map<std::pair<std::string, std::string>, std::string> delta;
    std::string start;
    std::set<std::string> accepting;

    void check() const; // throws invalid_argument on incomplete tables
};

// two-state automaton for odd parity; accepts words with an odd number of 1s
Dfa dfa_parity();

TokenTrace dfa_prefix_cot(const Dfa& dfa, const std::vector<std::string>& word);

CotVerdict dfa_cot_verify(const Dfa& dfa, const std::vector<std::string>& word,
                          const TokenTrace& trace);

// ---- binary multiplication -------------------------------------------------

// Operands are equal-length bit strings, most significant bit first. The
// product is rendered MSB-first and zero-padded to exactly 2N bits.
Bits mult_oracle(const Bits& x, const Bits& y);

// k-th product bit counted from the least significant end, k in [1, 2N];
// mult_digit(x, y, 1) is the units bit.
int mult_digit(const Bits& x, const Bits& y, size_t k);

// input encoding shared by both multiplication scratchpads:
// -1 [x digits] -1 [y digits] -1
std::vector<std::string> mult_encode(const Bits& x, const Bits& y);

// Grade-school scratchpad: for each multiplier bit, least significant first,
// emit the shifted partial product and the running sum (both trimmed of
// leading zeros), each followed by -1; close with the 2N-bit product.
TokenTrace mult_cot_schoolbook(const Bits& x, const Bits& y);

enum class NttCotMode {
    compact,    // final vector of each transform only
    butterflies // every Cooley-Tukey stage of each transform
};

// Transform-based scratchpad. Segments appear -1-separated in fixed order:
// both operands reversed and zero-padded to the transform length, the NTT of
// each, the same two NTTs with index hints, the pointwise product with and
// without hints, the inverse NTT, and the recombined 2N-bit product. In
// butterflies mode each transform expands into its log2(n) stage vectors,
// of which the last is the transform itself.
TokenTrace mult_cot_ntt(const Bits& x, const Bits& y,
                        NttCotMode mode = NttCotMode::compact);

// position labels for the hinted segments: a..z, then a1..z1, a2..
std::string index_hint(size_t i);

// transform length used by mult_cot_ntt: smallest power of two holding the
// full 2N-coefficient convolution, never below 2
uint64_t mult_ntt_length(size_t n_bits);

struct MultVerifyResult {
    bool ok = true;
    std::string bad_segment; // e.g. "ntt of first operand, stage 2"
    std::string detail;
};

// Recomputes every segment independently and reports the first divergence.
// mode must match the generator's; schoolbook traces are checked by
// mult_cot_verify_schoolbook below.
MultVerifyResult mult_cot_verify(const Bits& x, const Bits& y,
                                 const TokenTrace& trace, NttCotMode mode);

MultVerifyResult mult_cot_verify_schoolbook(const Bits& x, const Bits& y,
                                            const TokenTrace& trace);

// ---- median ----------------------------------------------------------------

// N numbers with exactly `digits` digits in `base` (2 or 10). Rendering is
// zero-padded, one token per digit. When require_unique is set, duplicate
// values are rejected at check() time; otherwise ties keep input order in
// the sorted enumeration.
struct MedianInstance {
    std::vector<long long> numbers;
    unsigned base = 10;
    size_t digits = 3;
    bool require_unique = false;

    void check() const;
};

// the element at 1-based rank floor(N/2)+1 of the sorted list
long long median_oracle(const std::vector<long long>& numbers);

// Trace layout: BOS, the numbers digit-by-digit with ";" after each, SEP,
// then every stride-th element (ranks stride, 2*stride, ...) of the sorted
// lowest floor(N/2) numbers, the median, and EOS; every emitted number is
// again digits + ";".
TokenTrace median_cot(const MedianInstance& inst, size_t stride = 1);

CotVerdict median_cot_verify(const MedianInstance& inst, size_t stride,
                             const TokenTrace& trace);

// ---- DAG reachability ------------------------------------------------------

struct ReachInstance {
    enum class Encoding {
        binary,  // vertices as ceil(log2 V) bit tokens; scratchpad atomizes
        decimal  // vertices as one zero-padded decimal token, no atomization
    };

    size_t vertices = 0;
    std::vector<std::pair<size_t, size_t>> edges;
    std::pair<size_t, size_t> query{0, 0};
    Encoding encoding = Encoding::decimal;

    void check() const; // bounds and duplicate edges; acyclicity is checked
                        // by reach_oracle, which walks the graph anyway
};

// 1 iff the query target is reachable from the source; throws on a cycle
int reach_oracle(const ReachInstance& inst);

// BOS [edge ;]* QUERY1 source QUERY2 target SEP, vertices per the encoding
std::vector<std::string> reach_encode(const ReachInstance& inst);

// number of digit tokens per vertex in binary encoding: max(1, ceil(log2 V))
size_t reach_vertex_bits(size_t vertices);

// decimal token width: digits of V-1, floored at two ("06" style)
size_t reach_vertex_width(size_t vertices);

// Scratchpad layout. Binary encoding first translates every vertex
// occurrence (edge endpoints in order, then the two query vertices) to an
// atomic token by enumerating "0" and the running sums of bit*2^i from the
// least significant bit up; the last sum is the vertex index itself. Then,
// in both encodings, a breadth-first search from the source: the source
// token; per dequeued vertex the 1-based head pointer followed by a copy of
// each of its out-edges in input order, enqueueing unvisited heads once;
// "1" immediately after an edge into the target, or "0" when the queue
// runs dry.
TokenTrace reach_cot_bfs(const ReachInstance& inst);

CotVerdict reach_cot_verify(const ReachInstance& inst,
                            const TokenTrace& trace);

// ---- one roof over all of the above -----------------------------------

struct ParityJob {
    Bits x;
    size_t stride = 1;
};
struct DfaJob {
    Dfa dfa;
    std::vector<std::string> word;
};
struct MultJob {
    Bits x, y;
    enum class Mode { schoolbook, ntt_compact, ntt_butterflies };
    Mode mode = Mode::ntt_compact;
};
struct MedianJob {
    MedianInstance inst;
    size_t stride = 1;
};
struct ReachJob {
    ReachInstance inst;
};

using CotJob = std::variant<ParityJob, DfaJob, MultJob, MedianJob, ReachJob>;

TokenTrace cot_generate(const CotJob& job);

// the bare oracle answer of a job, as the token sequence a correct trace
// ends in (the median answer additionally precedes its closing markers)
std::vector<std::string> cot_answer(const CotJob& job);

// Dispatches to the per-task verifier and folds the result into one shape:
// the trace must end in the oracle answer and every intermediate step must
// recompute.
CotVerdict cot_verify_generic(const CotJob& job, const TokenTrace& trace);

} // namespace cotlab
