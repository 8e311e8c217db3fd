#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cotlab/rational.hpp"
#include "cotlab/trace.hpp"

namespace cotlab {

// Hard-attention interpreter. All arithmetic is exact rational: attention
// picks the single argmax of the scores and the argmax of a discontinuous
// function must never hinge on rounding. Scores are scale-invariant, so
// integer-weight constructions lose nothing.
//
// Evaluation of a sequence y_1..y_t:
//   layer 0:  y_i = embed(token_i) + pos_i
//   layer k:  each head scores a_{i,j} = (K y_j) . (Q y_i) over j <= i,
//             attends to the argmax j-hat (ties broken by the program's
//             rule), and y_i becomes mlp(y_i + sum_h V_h y_{j-hat(h)})
//   output:   O y_i, one row per vocabulary token
// There is no layer norm; an absorbed normalization can live in the mlp.

using Activation = std::vector<Rat>;

struct SparseMat {
    struct Entry {
        size_t r = 0, c = 0;
        Rat v;
    };
    size_t rows = 0, cols = 0;
    std::vector<Entry> entries;

    void add(size_t r, size_t c, Rat v);
    Activation apply(const Activation& y) const;
};

enum class TieBreak { leftmost, rightmost };

using MlpFn = std::function<Activation(const Activation&)>;
using MlpBuilder = std::function<MlpFn(const nlohmann::json& params)>;

// mlps live in a name registry so programs serialize the name + parameters,
// never code; builders must be pure and deterministic
void register_mlp(const std::string& name, MlpBuilder builder);
MlpFn build_mlp(const std::string& name, const nlohmann::json& params);
std::vector<std::string> registered_mlps();

struct MlpSpec {
    std::string name = "identity";
    nlohmann::json params = nlohmann::json::object();
};

struct Head {
    SparseMat k, q, v; // each d x d
};

struct Layer {
    std::vector<Head> heads;
    MlpSpec mlp_spec;
    MlpFn mlp; // compiled from mlp_spec; filled by finalize()
};

struct UhatProgram {
    std::string name;
    size_t d = 0;
    size_t n_max = 0;
    TieBreak tie_break = TieBreak::leftmost;
    Alphabet vocab;
    std::map<std::string, Activation> embed; // token -> R^d
    std::vector<Activation> pos;             // pos[i] for position i+1
    std::vector<Layer> layers;
    SparseMat output; // |vocab| x d

    // checks dimensions and compiles every layer's mlp from the registry
    void finalize();
};

nlohmann::json program_to_json(const UhatProgram& prog);
UhatProgram program_from_json(const nlohmann::json& j);

struct Transcript {
    std::vector<std::string> tokens;
    // attended[i][k][h]: 0-based argmax position for query i, layer k, head h
    std::vector<std::vector<std::vector<size_t>>> attended;
    // acts[k][i]: activation of position i after layer k (k = 0 is embedding)
    std::vector<std::vector<Activation>> acts;
};

std::string transcript_csv(const Transcript& t);

// thrown when a trace would exceed the program's n_max
struct ContextOverflow : std::length_error {
    explicit ContextOverflow(const std::string& what)
        : std::length_error(what) {}
};

// incremental evaluator over a growing token sequence
class VmRun {
public:
    explicit VmRun(const UhatProgram& prog);

    void append(const std::string& token);
    size_t size() const { return transcript_.tokens.size(); }

    // output vector O y at position i (default: last)
    std::vector<Rat> output_at(size_t i) const;
    std::vector<Rat> output_last() const;

    const Transcript& transcript() const { return transcript_; }
    const UhatProgram& program() const { return prog_; }

private:
    const UhatProgram& prog_;
    Transcript transcript_;
    // keys_[k][h][i] = K y_i^(k) kept as (coord, value) pairs; hand-built
    // programs have keys with few nonzeros and the score scan dominates
    std::vector<std::vector<std::vector<std::vector<std::pair<size_t, Rat>>>>> keys_;
};

struct StepResult {
    std::string token;
    size_t index = 0;
    bool one_hot = false;
    std::vector<Rat> output;
};

// run the stack over the tokens and report the argmax output row at the
// last position (first index wins exact ties); one_hot flags whether the
// output vector is exactly a 0/1 indicator
StepResult vm_step(const UhatProgram& prog, const std::vector<std::string>& tokens);

struct StopRule {
    std::set<std::string> stop_labels; // stop after emitting one of these
    size_t max_steps = 0;              // 0 = no step cap

    static StopRule steps(size_t n) { return StopRule{{}, n}; }
    static StopRule label(std::string l, size_t cap = 0) {
        return StopRule{{std::move(l)}, cap};
    }
};

struct DecodeResult {
    TokenTrace trace; // input tokens plus everything emitted
    Transcript transcript;
    bool stopped_on_label = false;
    bool all_outputs_one_hot = true;
};

DecodeResult vm_decode(const UhatProgram& prog,
                       const std::vector<std::string>& input,
                       const StopRule& stop);

// exact score matrix of one head over a full sequence: scores[i][j] for
// j <= i (inner vectors are ragged); layer is 1-based
std::vector<std::vector<Rat>> attention_scores(
    const UhatProgram& prog, const std::vector<std::string>& tokens,
    size_t layer, size_t head);

// true iff O y is exactly one-hot at every completion position of the
// trace, i.e. positions input_len-1 .. len-2 (0-based), the ones whose
// outputs generate the completion
bool check_one_hot_output(const UhatProgram& prog, const TokenTrace& trace);

// predicted next token at every completion-generating position
std::vector<std::string> vm_predict_all(const UhatProgram& prog,
                                        const TokenTrace& trace);

} // namespace cotlab
