#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cotlab/trace.hpp"
#include "cotlab/uhat.hpp"

namespace cotlab {

// Hand-built interpreter programs plus a Turing-machine-to-program
// compiler. Every constructor returns a finalized UhatProgram whose mlps
// come from the shared registry, so the programs survive a JSON roundtrip.

// ---- Turing machines ----

struct TmAction {
    enum class Kind { move_left, move_right, write };
    Kind kind = Kind::move_left;
    std::string symbol; // written symbol; empty unless kind == write

    std::string label() const; // "L", "R", or "W:sym"
    static TmAction parse(const std::string& s);
    bool operator==(const TmAction& o) const = default;
};

// One-way-infinite-tape machine. The tape initially holds the input word
// starting at position 0, then the separator, then blanks. delta must be
// total on alphabet x (states minus terminating); the head must never move
// left of position 0 (a runtime check, not a static one).
struct TuringMachine {
    std::vector<std::string> alphabet; // tape symbols, incl. blank/separator
    std::string blank = "_";
    std::string separator = "#";
    std::vector<std::string> states;
    std::string start;
    std::set<std::string> terminating;
    std::set<std::string> accepting; // subset of terminating
    std::map<std::pair<std::string, std::string>,
             std::pair<TmAction, std::string>>
        delta; // (state, symbol) -> (action, next state)

    void check() const;
};

// Text format, one declaration per line ('#' starts a comment):
//   alphabet 0 1 # _
//   blank _
//   separator #
//   states even odd acc rej
//   start even
//   terminating acc rej
//   accepting acc
//   transition even 1 -> R odd
TuringMachine tm_parse(const std::string& text);
std::string tm_render(const TuringMachine& tm);

struct TmStep {
    size_t pos_after = 0;
    TmAction action;
    std::string state_after;

    std::string label() const; // "pos|action|state", the CoT token
};

struct TmRun {
    bool accepted = false;
    std::vector<TmStep> steps;
    std::vector<std::string> final_tape;
    size_t final_pos = 0;
    std::string final_state;
};

// thrown when a simulation does not terminate within its step bound
struct TmStepBound : std::length_error {
    explicit TmStepBound(const std::string& what) : std::length_error(what) {}
};

TmRun tm_simulate(const TuringMachine& tm,
                  const std::vector<std::string>& word, size_t max_steps);

// reference trace: word, separator, one token per step, then "1"/"0" for
// accept/reject; input_len covers word + separator
TokenTrace tm_cot_trace(const TuringMachine& tm,
                        const std::vector<std::string>& word,
                        size_t max_steps);

// One layer, two heads. Head 1 retrieves the most recent write at the
// current tape position: keys carry (tape-position one-hot, write flag,
// sequence position scalar) and queries weight them 3n / 2n / 1 with
// n = n_max, so the three (match, write) buckets stay disjoint and the
// scalar makes the argmax unique without relying on the tie rule. Head 2
// retrieves the token sitting at sequence position i+1, which holds the
// untouched input symbol for tape position i. The mlp validates head 1,
// falls back to head 2, then to blank, applies delta, and one-hots the
// next step token; on a terminating state it one-hots the answer token.
// Handles words up to max_word symbols and runs up to max_steps steps.
UhatProgram tm_compile(const TuringMachine& tm, size_t max_word,
                       size_t max_steps);

// decode driver for compiled machines: runs from "word separator" until an
// answer token appears; cap is a safety net against runaway machines
TokenTrace tm_compiled_decode(const UhatProgram& prog,
                              const TuringMachine& tm,
                              const std::vector<std::string>& word,
                              size_t max_steps);

// fixture machines (also shipped as text files under fixtures/)
TuringMachine tm_parity();          // accepts words with an odd number of 1s
TuringMachine tm_unary_increment(); // appends one 1 before the separator

// ---- direct constructions ----

// One layer, one head, d = 4. The head scores 1 on zero-bit positions and
// 0 elsewhere, so the retrieved token is a 0 iff one exists; the mlp
// complements the retrieved indicator and the output head reads the pair
// off as the answer row. Decoding any x in {0,1}^N appends AND(x) in one
// step.
UhatProgram and_head(size_t n);

// Three layers, one head each. Scratchpad: 2^N dots, then "#", then the
// answer. Layer 1 is attention-degenerate; its mlp rewrites the key block
// so input position j holds e_j (bit 0) or e_{N+j} (bit 1) and scratch
// positions hold the constant -1 vector. Layer 2 scores (key_j, query_i)
// with query (xi^(i), 1-xi^(i)) read off the positional encoding, so a
// mismatching input position scores 1, a matching one 0, scratch -N; the
// mlp folds the retrieved key into the query block and flags the dot whose
// bitstring equals x. Layer 3, queried at "#", gathers the unique flagged
// dot and copies its hard-wired parity bit out of the positional encoding.
// The key/query geometry is the textbook two-layer scheme; the extra layer
// exists because keys are linear in the layer input, so the (token,
// position) product keys have to be prepared by an mlp first.
UhatProgram parity_dot_by_dot(size_t n);

// cap: the scratchpad costs 2^N context positions
inline constexpr size_t parity_dot_by_dot_max_n = 12;

// One layer, one head. Values 1..range get one-hot embeddings; "SEP"
// carries virtual value 0. The comparator on value pair (key i, query j)
// scores -1 when i <= j and G + j - i otherwise with G = max(N, range),
// so each query retrieves the smallest input value strictly above its own
// and decoding emits the inputs ascending. Stop after floor(N/2)+1
// emissions to read the median. Values must be distinct.
UhatProgram median_sorter(size_t n, size_t value_range);

// input tokens for the sorter: the numbers then "SEP"; throws on
// duplicates or out-of-range values
std::vector<std::string> median_sorter_input(const std::vector<size_t>& values,
                                             size_t value_range);

inline size_t median_sorter_steps(size_t n) { return n / 2 + 1; }

// registers this module's mlp builders; constructors call it themselves,
// deserializers of foreign program files may need it explicitly
void register_program_mlps();

} // namespace cotlab
