#include "cotlab/uhat_programs.hpp"

#include <algorithm>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace cotlab {

// ---- Turing machine basics ----

std::string TmAction::label() const {
    switch (kind) {
    case Kind::move_left: return "L";
    case Kind::move_right: return "R";
    case Kind::write: return "W:" + symbol;
    }
    throw std::logic_error("unreachable action kind");
}

TmAction TmAction::parse(const std::string& s) {
    if (s == "L") return {Kind::move_left, ""};
    if (s == "R") return {Kind::move_right, ""};
    if (s.rfind("W:", 0) == 0 && s.size() > 2)
        return {Kind::write, s.substr(2)};
    throw std::invalid_argument("bad action '" + s + "' (want L, R, W:sym)");
}

std::string TmStep::label() const {
    return std::to_string(pos_after) + "|" + action.label() + "|" +
           state_after;
}

void TuringMachine::check() const {
    if (alphabet.empty()) throw std::invalid_argument("tm: empty alphabet");
    std::set<std::string> syms(alphabet.begin(), alphabet.end());
    if (syms.size() != alphabet.size())
        throw std::invalid_argument("tm: duplicate alphabet symbol");
    if (!syms.count(blank)) throw std::invalid_argument("tm: blank not in alphabet");
    if (!syms.count(separator))
        throw std::invalid_argument("tm: separator not in alphabet");
    if (states.empty()) throw std::invalid_argument("tm: empty state set");
    std::set<std::string> sts(states.begin(), states.end());
    if (sts.size() != states.size())
        throw std::invalid_argument("tm: duplicate state");
    if (!sts.count(start)) throw std::invalid_argument("tm: unknown start state");
    if (terminating.empty())
        throw std::invalid_argument("tm: terminating set is empty");
    for (const auto& q : terminating)
        if (!sts.count(q))
            throw std::invalid_argument("tm: terminating state '" + q +
                                        "' not declared");
    for (const auto& q : accepting)
        if (!terminating.count(q))
            throw std::invalid_argument("tm: accepting state '" + q +
                                        "' must be terminating");
    for (const auto& [key, rhs] : delta) {
        if (!sts.count(key.first))
            throw std::invalid_argument("tm: transition from unknown state '" +
                                        key.first + "'");
        if (!syms.count(key.second))
            throw std::invalid_argument("tm: transition on unknown symbol '" +
                                        key.second + "'");
        if (!sts.count(rhs.second))
            throw std::invalid_argument("tm: transition to unknown state '" +
                                        rhs.second + "'");
        if (rhs.first.kind == TmAction::Kind::write &&
            !syms.count(rhs.first.symbol))
            throw std::invalid_argument("tm: write of unknown symbol '" +
                                        rhs.first.symbol + "'");
    }
    for (const auto& q : states) {
        if (terminating.count(q)) continue;
        for (const auto& s : alphabet)
            if (!delta.count({q, s}))
                throw std::invalid_argument("tm: delta misses (" + q + ", " +
                                            s + ")");
    }
}

TuringMachine tm_parse(const std::string& text) {
    TuringMachine tm;
    bool saw_blank = false, saw_sep = false;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_tokens(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        const std::string& kw = toks[0];
        auto rest = std::vector<std::string>(toks.begin() + 1, toks.end());
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("tm line " + std::to_string(lineno) +
                                        ": " + why);
        };
        if (kw == "alphabet") {
            if (rest.empty()) fail("alphabet needs symbols");
            tm.alphabet = rest;
        } else if (kw == "blank") {
            if (rest.size() != 1) fail("blank takes one symbol");
            tm.blank = rest[0];
            saw_blank = true;
        } else if (kw == "separator") {
            if (rest.size() != 1) fail("separator takes one symbol");
            tm.separator = rest[0];
            saw_sep = true;
        } else if (kw == "states") {
            if (rest.empty()) fail("states needs names");
            tm.states = rest;
        } else if (kw == "start") {
            if (rest.size() != 1) fail("start takes one state");
            tm.start = rest[0];
        } else if (kw == "terminating") {
            tm.terminating.insert(rest.begin(), rest.end());
        } else if (kw == "accepting") {
            tm.accepting.insert(rest.begin(), rest.end());
        } else if (kw == "transition") {
            if (rest.size() != 5 || rest[2] != "->")
                fail("want: transition state symbol -> action state");
            auto key = std::make_pair(rest[0], rest[1]);
            if (tm.delta.count(key))
                fail("duplicate transition for (" + rest[0] + ", " + rest[1] +
                     ")");
            tm.delta[key] = {TmAction::parse(rest[3]), rest[4]};
        } else {
            fail("unknown directive '" + kw + "'");
        }
    }
    (void)saw_blank;
    (void)saw_sep;
    tm.check();
    return tm;
}

std::string tm_render(const TuringMachine& tm) {
    std::string out = "alphabet " + join_tokens(tm.alphabet) + "\n";
    out += "blank " + tm.blank + "\n";
    out += "separator " + tm.separator + "\n";
    out += "states " + join_tokens(tm.states) + "\n";
    out += "start " + tm.start + "\n";
    out += "terminating " +
           join_tokens({tm.terminating.begin(), tm.terminating.end()}) + "\n";
    if (!tm.accepting.empty())
        out += "accepting " +
               join_tokens({tm.accepting.begin(), tm.accepting.end()}) + "\n";
    for (const auto& [key, rhs] : tm.delta)
        out += "transition " + key.first + " " + key.second + " -> " +
               rhs.first.label() + " " + rhs.second + "\n";
    return out;
}

TmRun tm_simulate(const TuringMachine& tm,
                  const std::vector<std::string>& word, size_t max_steps) {
    tm.check();
    if (max_steps < 1) throw std::invalid_argument("tm: step bound must be >= 1");
    std::set<std::string> syms(tm.alphabet.begin(), tm.alphabet.end());
    for (const auto& s : word)
        if (!syms.count(s) || s == tm.blank || s == tm.separator)
            throw std::invalid_argument("tm: input symbol '" + s +
                                        "' not allowed in a word");
    TmRun run;
    std::vector<std::string> tape = word;
    tape.push_back(tm.separator);
    size_t pos = 0;
    std::string state = tm.start;
    while (!tm.terminating.count(state)) {
        if (run.steps.size() >= max_steps)
            throw TmStepBound("tm did not halt within " +
                              std::to_string(max_steps) + " steps");
        const std::string& sym = pos < tape.size() ? tape[pos] : tm.blank;
        const auto& [action, next] = tm.delta.at({state, sym});
        switch (action.kind) {
        case TmAction::Kind::move_left:
            if (pos == 0)
                throw std::runtime_error("tm head moved left of position 0");
            --pos;
            break;
        case TmAction::Kind::move_right:
            ++pos;
            if (pos == tape.size()) tape.push_back(tm.blank);
            break;
        case TmAction::Kind::write:
            tape[pos] = action.symbol;
            break;
        }
        run.steps.push_back({pos, action, next});
        state = next;
    }
    run.accepted = tm.accepting.count(state) > 0;
    run.final_tape = std::move(tape);
    run.final_pos = pos;
    run.final_state = state;
    return run;
}

TokenTrace tm_cot_trace(const TuringMachine& tm,
                        const std::vector<std::string>& word,
                        size_t max_steps) {
    TmRun run = tm_simulate(tm, word, max_steps);
    TokenTrace tr;
    tr.tokens = word;
    tr.tokens.push_back(tm.separator);
    tr.input_len = tr.tokens.size();
    for (const auto& s : run.steps) tr.tokens.push_back(s.label());
    tr.tokens.push_back(run.accepted ? "1" : "0");
    return tr;
}

// ---- Turing machine compiler ----

namespace {

// Coordinate plan shared by tm_compile and the "tm_step" mlp builder; both
// sides derive it from (machine, max_word, max_steps) so a serialized
// program rebuilds the exact same geometry.
struct TmLayout {
    size_t max_word = 0, max_steps = 0;
    size_t p = 0;     // addressable tape positions
    size_t n_max = 0; // context bound
    size_t nsym = 0, nstate = 0;
    size_t c_one = 0;
    size_t tp = 0;     // token's tape position (separator: 0; triples: i)
    size_t c_wf = 0;   // token is a write step
    size_t wsym = 0;   // written symbol
    size_t st = 0;     // token's machine state
    size_t c_time = 0; // scalar sequence position, from the positional table
    size_t sp = 0;     // sequence position one-hot, positional
    size_t sym = 0;    // tape-symbol identity of the token
    size_t c_tape = 0; // token occupies a tape cell (word symbols, separator)
    size_t h1tp = 0, c_h1wf = 0, h1ws = 0;  // head 1 receive blocks
    size_t h2sp = 0, h2sym = 0, c_h2tc = 0; // head 2 receive blocks
    size_t out = 0;    // one-hot of the next token
    size_t d = 0;
    std::vector<std::string> actions;
    std::unordered_map<std::string, size_t> sym_idx, state_idx;
    std::vector<std::string> vocab;
    std::unordered_map<std::string, size_t> vocab_idx;
};

std::string tm_triple_label(size_t i, const std::string& action,
                            const std::string& state) {
    return std::to_string(i) + "|" + action + "|" + state;
}

TmLayout tm_layout(const TuringMachine& tm, size_t max_word,
                   size_t max_steps) {
    TmLayout L;
    L.max_word = max_word;
    L.max_steps = max_steps;
    L.p = max_word + max_steps + 2;
    L.n_max = max_word + 1 + max_steps + 1;
    L.nsym = tm.alphabet.size();
    L.nstate = tm.states.size();
    for (size_t i = 0; i < L.nsym; ++i) L.sym_idx[tm.alphabet[i]] = i;
    for (size_t i = 0; i < L.nstate; ++i) L.state_idx[tm.states[i]] = i;
    L.actions = {"L", "R"};
    for (const auto& s : tm.alphabet) L.actions.push_back("W:" + s);

    L.vocab = tm.alphabet;
    for (size_t i = 0; i < L.p; ++i)
        for (const auto& a : L.actions)
            for (const auto& q : tm.states)
                L.vocab.push_back(tm_triple_label(i, a, q));
    for (const auto& ans : {std::string("0"), std::string("1")})
        if (std::find(L.vocab.begin(), L.vocab.end(), ans) == L.vocab.end())
            L.vocab.push_back(ans);
    for (size_t i = 0; i < L.vocab.size(); ++i) L.vocab_idx[L.vocab[i]] = i;

    size_t at = 0;
    L.c_one = at++;
    L.tp = at, at += L.p;
    L.c_wf = at++;
    L.wsym = at, at += L.nsym;
    L.st = at, at += L.nstate;
    L.c_time = at++;
    L.sp = at, at += L.n_max;
    L.sym = at, at += L.nsym;
    L.c_tape = at++;
    L.h1tp = at, at += L.p;
    L.c_h1wf = at++;
    L.h1ws = at, at += L.nsym;
    L.h2sp = at, at += L.n_max;
    L.h2sym = at, at += L.nsym;
    L.c_h2tc = at++;
    L.out = at, at += L.vocab.size();
    L.d = at;
    return L;
}

// index of the single 1 in a block, or nothing
std::optional<size_t> find_one(const Activation& y, size_t base, size_t len) {
    for (size_t c = 0; c < len; ++c)
        if (y[base + c] == Rat(1)) return c;
    return std::nullopt;
}

MlpFn build_tm_step(const nlohmann::json& params) {
    auto tm = std::make_shared<TuringMachine>(
        tm_parse(params.at("tm").get<std::string>()));
    auto L = std::make_shared<TmLayout>(
        tm_layout(*tm, params.at("max_word").get<size_t>(),
                  params.at("max_steps").get<size_t>()));
    return [tm, L](const Activation& yin) {
        Activation y = yin;
        for (size_t c = 0; c < L->vocab.size(); ++c) y[L->out + c] = Rat(0);
        auto state = find_one(y, L->st, L->nstate);
        if (!state) return y; // word positions predict nothing
        const std::string& q = tm->states[*state];
        if (tm->terminating.count(q)) {
            bool acc = tm->accepting.count(q) > 0;
            y[L->out + L->vocab_idx.at(acc ? "1" : "0")] = Rat(1);
            return y;
        }
        auto tpos = find_one(y, L->tp, L->p);
        if (!tpos) return y;
        size_t i = *tpos;
        std::string sym = tm->blank;
        if (y[L->c_h1wf] == Rat(1) && y[L->h1tp + i] == Rat(1)) {
            // head 1 certified: the most recent write at this tape position
            if (auto s = find_one(y, L->h1ws, L->nsym))
                sym = tm->alphabet[*s];
        } else if (y[L->c_h2tc] == Rat(1) && i < L->n_max &&
                   y[L->h2sp + i] == Rat(1)) {
            // head 2 certified: the untouched input symbol at position i
            if (auto s = find_one(y, L->h2sym, L->nsym))
                sym = tm->alphabet[*s];
        }
        auto it = tm->delta.find({q, sym});
        if (it == tm->delta.end()) return y;
        const auto& [action, next] = it->second;
        size_t ip = i;
        switch (action.kind) {
        case TmAction::Kind::move_left:
            ip = i > 0 ? i - 1 : 0; // legal runs never hit the clamp
            break;
        case TmAction::Kind::move_right:
            ip = std::min(i + 1, L->p - 1);
            break;
        case TmAction::Kind::write: break;
        }
        y[L->out + L->vocab_idx.at(tm_triple_label(ip, action.label(), next))] =
            Rat(1);
        return y;
    };
}

} // namespace

UhatProgram tm_compile(const TuringMachine& tm, size_t max_word,
                       size_t max_steps) {
    tm.check();
    register_program_mlps();
    TmLayout L = tm_layout(tm, max_word, max_steps);
    long long n = (long long)L.n_max;

    UhatProgram prog;
    prog.name = "tm-compiled-w" + std::to_string(max_word) + "-s" +
                std::to_string(max_steps);
    prog.d = L.d;
    prog.n_max = L.n_max;
    prog.vocab = Alphabet(L.vocab);

    for (const auto& s : tm.alphabet) {
        Activation e(L.d);
        e[L.c_one] = Rat(1);
        e[L.sym + L.sym_idx.at(s)] = Rat(1);
        e[L.c_tape] = Rat(1);
        if (s == tm.separator) {
            // the separator seeds the run: head at tape cell 0, start state
            e[L.tp + 0] = Rat(1);
            e[L.st + L.state_idx.at(tm.start)] = Rat(1);
        }
        prog.embed[s] = std::move(e);
    }
    for (size_t i = 0; i < L.p; ++i)
        for (const auto& a : L.actions)
            for (const auto& q : tm.states) {
                Activation e(L.d);
                e[L.c_one] = Rat(1);
                e[L.tp + i] = Rat(1);
                e[L.st + L.state_idx.at(q)] = Rat(1);
                if (a.rfind("W:", 0) == 0) {
                    e[L.c_wf] = Rat(1);
                    e[L.wsym + L.sym_idx.at(a.substr(2))] = Rat(1);
                }
                prog.embed[tm_triple_label(i, a, q)] = std::move(e);
            }
    for (const auto& ans : {std::string("0"), std::string("1")})
        if (!prog.embed.count(ans)) {
            Activation e(L.d);
            e[L.c_one] = Rat(1);
            prog.embed[ans] = std::move(e);
        }

    prog.pos.resize(L.n_max);
    for (size_t t = 0; t < L.n_max; ++t) {
        Activation p(L.d);
        p[L.c_time] = Rat((long long)t + 1);
        p[L.sp + t] = Rat(1);
        prog.pos[t] = std::move(p);
    }

    Head h1;
    h1.k.rows = h1.k.cols = L.d;
    h1.q.rows = h1.q.cols = L.d;
    h1.v.rows = h1.v.cols = L.d;
    for (size_t c = 0; c < L.p; ++c) h1.k.add(L.tp + c, L.tp + c, Rat(1));
    h1.k.add(L.c_wf, L.c_wf, Rat(1));
    h1.k.add(L.c_time, L.c_time, Rat(1));
    for (size_t c = 0; c < L.p; ++c) h1.q.add(L.tp + c, L.tp + c, Rat(3 * n));
    h1.q.add(L.c_wf, L.c_one, Rat(2 * n));
    h1.q.add(L.c_time, L.c_one, Rat(1));
    for (size_t c = 0; c < L.p; ++c) h1.v.add(L.h1tp + c, L.tp + c, Rat(1));
    h1.v.add(L.c_h1wf, L.c_wf, Rat(1));
    for (size_t c = 0; c < L.nsym; ++c)
        h1.v.add(L.h1ws + c, L.wsym + c, Rat(1));

    Head h2;
    h2.k.rows = h2.k.cols = L.d;
    h2.q.rows = h2.q.cols = L.d;
    h2.v.rows = h2.v.cols = L.d;
    for (size_t c = 0; c < L.n_max; ++c) h2.k.add(L.sp + c, L.sp + c, Rat(1));
    for (size_t c = 0; c < std::min(L.p, L.n_max); ++c)
        h2.q.add(L.sp + c, L.tp + c, Rat(1));
    for (size_t c = 0; c < L.n_max; ++c)
        h2.v.add(L.h2sp + c, L.sp + c, Rat(1));
    for (size_t c = 0; c < L.nsym; ++c)
        h2.v.add(L.h2sym + c, L.sym + c, Rat(1));
    h2.v.add(L.c_h2tc, L.c_tape, Rat(1));

    Layer layer;
    layer.heads = {std::move(h1), std::move(h2)};
    layer.mlp_spec.name = "tm_step";
    layer.mlp_spec.params = {{"tm", tm_render(tm)},
                             {"max_word", max_word},
                             {"max_steps", max_steps}};
    prog.layers.push_back(std::move(layer));

    prog.output.rows = L.vocab.size();
    prog.output.cols = L.d;
    for (size_t r = 0; r < L.vocab.size(); ++r)
        prog.output.add(r, L.out + r, Rat(1));

    prog.finalize();
    return prog;
}

TokenTrace tm_compiled_decode(const UhatProgram& prog,
                              const TuringMachine& tm,
                              const std::vector<std::string>& word,
                              size_t max_steps) {
    std::vector<std::string> input = word;
    input.push_back(tm.separator);
    StopRule stop{{"0", "1"}, max_steps + 2};
    DecodeResult res = vm_decode(prog, input, stop);
    if (!res.stopped_on_label)
        throw std::runtime_error("compiled machine emitted no answer within " +
                                 std::to_string(max_steps + 2) + " steps");
    return res.trace;
}

TuringMachine tm_parity() {
    TuringMachine tm;
    tm.alphabet = {"0", "1", "#", "_"};
    tm.blank = "_";
    tm.separator = "#";
    tm.states = {"even", "odd", "acc", "rej"};
    tm.start = "even";
    tm.terminating = {"acc", "rej"};
    tm.accepting = {"acc"};
    auto right = [](const std::string& q) {
        return std::make_pair(TmAction{TmAction::Kind::move_right, ""}, q);
    };
    tm.delta[{"even", "0"}] = right("even");
    tm.delta[{"even", "1"}] = right("odd");
    tm.delta[{"odd", "0"}] = right("odd");
    tm.delta[{"odd", "1"}] = right("even");
    tm.delta[{"even", "#"}] = right("rej");
    tm.delta[{"odd", "#"}] = right("acc");
    tm.delta[{"even", "_"}] = right("rej");
    tm.delta[{"odd", "_"}] = right("acc");
    tm.check();
    return tm;
}

TuringMachine tm_unary_increment() {
    TuringMachine tm;
    tm.alphabet = {"1", "#", "_"};
    tm.blank = "_";
    tm.separator = "#";
    tm.states = {"scan", "w1", "w2", "fin"};
    tm.start = "scan";
    tm.terminating = {"fin"};
    tm.accepting = {"fin"};
    auto mv = [](const std::string& q) {
        return std::make_pair(TmAction{TmAction::Kind::move_right, ""}, q);
    };
    auto wr = [](const std::string& s, const std::string& q) {
        return std::make_pair(TmAction{TmAction::Kind::write, s}, q);
    };
    tm.delta[{"scan", "1"}] = mv("scan");
    tm.delta[{"scan", "#"}] = wr("1", "w1");
    tm.delta[{"scan", "_"}] = wr("#", "fin");
    tm.delta[{"w1", "1"}] = mv("w2");
    tm.delta[{"w1", "#"}] = mv("w2");
    tm.delta[{"w1", "_"}] = mv("w2");
    tm.delta[{"w2", "1"}] = mv("w2");
    tm.delta[{"w2", "#"}] = mv("w2");
    tm.delta[{"w2", "_"}] = wr("#", "fin");
    tm.check();
    return tm;
}

// ---- AND in a single head ----

namespace {

// coordinates of the 4-wide AND program
constexpr size_t and_c_one = 0;  // constant 1 on every token
constexpr size_t and_c_ind0 = 1; // token is a 0
constexpr size_t and_c_z = 2;    // retrieved zero indicator
constexpr size_t and_c_nz = 3;   // its complement

MlpFn build_and_flags(const nlohmann::json&) {
    return [](const Activation& yin) {
        Activation y = yin;
        y[and_c_nz] = Rat(1) - y[and_c_z];
        return y;
    };
}

} // namespace

UhatProgram and_head(size_t n) {
    if (n < 1) throw std::invalid_argument("and_head: n must be >= 1");
    register_program_mlps();
    UhatProgram prog;
    prog.name = "and-head-n" + std::to_string(n);
    prog.d = 4;
    prog.n_max = n + 1;
    prog.vocab = Alphabet({"0", "1"});
    prog.embed["0"] = {Rat(1), Rat(1), Rat(0), Rat(0)};
    prog.embed["1"] = {Rat(1), Rat(0), Rat(0), Rat(0)};
    prog.pos.assign(prog.n_max, Activation(prog.d));

    Head h;
    h.k.rows = h.k.cols = prog.d;
    h.q.rows = h.q.cols = prog.d;
    h.v.rows = h.v.cols = prog.d;
    h.k.add(and_c_ind0, and_c_ind0, Rat(1)); // key = zero indicator
    h.q.add(and_c_ind0, and_c_one, Rat(1));  // every query asks for a zero
    h.v.add(and_c_z, and_c_ind0, Rat(1));

    Layer layer;
    layer.heads = {std::move(h)};
    layer.mlp_spec.name = "and_flags";
    prog.layers.push_back(std::move(layer));

    prog.output.rows = 2;
    prog.output.cols = prog.d;
    prog.output.add(0, and_c_z, Rat(1));  // a zero somewhere: answer 0
    prog.output.add(1, and_c_nz, Rat(1)); // none: answer 1
    prog.finalize();
    return prog;
}

// ---- parity with a dot-by-dot scratchpad ----

namespace {

// coordinate plan for parity_dot_by_dot(n); everything is derived from n
struct DotLayout {
    size_t n = 0;
    size_t blk_k = 0;     // 2n: prepared keys
    size_t blk_q = 0;     // 2n: (xi, 1-xi) queries, receives keys in layer 2
    size_t c_one = 0;
    size_t c_tok0 = 0, c_tok1 = 0, c_dot = 0, c_hash = 0;
    size_t c_flag = 0;    // this dot's bitstring equals the input
    size_t c_par = 0;     // hard-wired parity of the dot's bitstring
    size_t c_parret = 0;  // parity gathered at "#"
    size_t c_nextdot = 0, c_nexthash = 0, c_nextans = 0;
    size_t c_outdot = 0, c_outhash = 0, c_out0 = 0, c_out1 = 0;
    size_t d = 0;
};

DotLayout dot_layout(size_t n) {
    DotLayout L;
    L.n = n;
    L.blk_k = 0;
    L.blk_q = 2 * n;
    size_t at = 4 * n;
    L.c_one = at++;
    L.c_tok0 = at++;
    L.c_tok1 = at++;
    L.c_dot = at++;
    L.c_hash = at++;
    L.c_flag = at++;
    L.c_par = at++;
    L.c_parret = at++;
    L.c_nextdot = at++;
    L.c_nexthash = at++;
    L.c_nextans = at++;
    L.c_outdot = at++;
    L.c_outhash = at++;
    L.c_out0 = at++;
    L.c_out1 = at++;
    L.d = at;
    return L;
}

MlpFn build_parity_prepare(const nlohmann::json& params) {
    DotLayout L = dot_layout(params.at("n").get<size_t>());
    return [L](const Activation& yin) {
        Activation y = yin;
        if (y[L.c_tok0] == Rat(1) || y[L.c_tok1] == Rat(1)) {
            // a word bit: turn the positional one-hot into the key e_j /
            // e_{n+j}; an emitted answer bit has no one-hot and stays put
            if (auto j = find_one(y, L.blk_k, L.n)) {
                bool one = y[L.c_tok1] == Rat(1);
                for (size_t c = 0; c < 2 * L.n; ++c) y[L.blk_k + c] = Rat(0);
                y[L.blk_k + *j + (one ? L.n : 0)] = Rat(1);
            }
        } else if (y[L.c_dot] == Rat(1) || y[L.c_hash] == Rat(1)) {
            for (size_t c = 0; c < 2 * L.n; ++c) y[L.blk_k + c] = Rat(-1);
        }
        return y;
    };
}

MlpFn build_parity_match(const nlohmann::json& params) {
    DotLayout L = dot_layout(params.at("n").get<size_t>());
    return [L](const Activation& yin) {
        Activation y = yin;
        if (y[L.c_dot] == Rat(1)) {
            // the head delivered the retrieved key on top of (xi, 1-xi);
            // a coordinate reaching 2 certifies a genuine mismatch
            Rat flag(1);
            for (size_t c = 0; c < 2 * L.n; ++c)
                if (y[L.blk_q + c] >= Rat(2)) flag = Rat(0);
            y[L.c_flag] = flag;
        } else {
            y[L.c_flag] = Rat(0);
        }
        return y;
    };
}

MlpFn build_parity_emit(const nlohmann::json& params) {
    DotLayout L = dot_layout(params.at("n").get<size_t>());
    return [L](const Activation& yin) {
        Activation y = yin;
        y[L.c_outdot] = y[L.c_nextdot];
        y[L.c_outhash] = y[L.c_nexthash];
        y[L.c_out0] = y[L.c_nextans] * (Rat(1) - y[L.c_parret]);
        y[L.c_out1] = y[L.c_nextans] * y[L.c_parret];
        return y;
    };
}

} // namespace

UhatProgram parity_dot_by_dot(size_t n) {
    if (n < 1) throw std::invalid_argument("parity_dot_by_dot: n must be >= 1");
    if (n > parity_dot_by_dot_max_n)
        throw std::invalid_argument(
            "parity_dot_by_dot: n exceeds the scratchpad cap of " +
            std::to_string(parity_dot_by_dot_max_n));
    register_program_mlps();
    DotLayout L = dot_layout(n);
    size_t pow = size_t(1) << n;

    UhatProgram prog;
    prog.name = "parity-dots-n" + std::to_string(n);
    prog.d = L.d;
    prog.n_max = n + pow + 2;
    prog.vocab = Alphabet({"0", "1", ".", "#"});

    auto embed = [&](size_t flag) {
        Activation e(L.d);
        e[L.c_one] = Rat(1);
        e[flag] = Rat(1);
        return e;
    };
    prog.embed["0"] = embed(L.c_tok0);
    prog.embed["1"] = embed(L.c_tok1);
    prog.embed["."] = embed(L.c_dot);
    prog.embed["#"] = embed(L.c_hash);

    prog.pos.assign(prog.n_max, Activation(L.d));
    for (size_t t = 0; t < prog.n_max; ++t) {
        size_t p = t + 1;
        Activation& v = prog.pos[t];
        if (p <= n) v[L.blk_k + p - 1] = Rat(1);
        if (p > n && p <= n + pow) {
            size_t i = p - n; // dot index, carrying bitstring xi^(i)
            size_t bits = i - 1;
            int par = 0;
            for (size_t j = 0; j < n; ++j) {
                int b = int((bits >> j) & 1);
                par ^= b;
                v[L.blk_q + j] = Rat(b);
                v[L.blk_q + n + j] = Rat(1 - b);
            }
            v[L.c_par] = Rat(par);
        }
        if (p >= n && p < n + pow) v[L.c_nextdot] = Rat(1);
        if (p == n + pow) v[L.c_nexthash] = Rat(1);
        if (p == n + pow + 1) v[L.c_nextans] = Rat(1);
    }

    auto blank_head = [&] {
        Head h;
        h.k.rows = h.k.cols = L.d;
        h.q.rows = h.q.cols = L.d;
        h.v.rows = h.v.cols = L.d;
        return h;
    };

    Layer l1; // attention degenerate; the mlp prepares keys
    l1.heads = {blank_head()};
    l1.mlp_spec = {"parity_prepare", {{"n", n}}};

    Layer l2; // the mismatch head
    Head h2 = blank_head();
    for (size_t c = 0; c < 2 * n; ++c) {
        h2.k.add(L.blk_k + c, L.blk_k + c, Rat(1));
        h2.q.add(L.blk_k + c, L.blk_q + c, Rat(1));
        h2.v.add(L.blk_q + c, L.blk_k + c, Rat(1));
    }
    l2.heads = {std::move(h2)};
    l2.mlp_spec = {"parity_match", {{"n", n}}};

    Layer l3; // "#" gathers the flagged dot and reads its parity
    Head h3 = blank_head();
    h3.k.add(L.c_flag, L.c_flag, Rat(1));
    h3.q.add(L.c_flag, L.c_hash, Rat(1));
    h3.v.add(L.c_parret, L.c_par, Rat(1));
    l3.heads = {std::move(h3)};
    l3.mlp_spec = {"parity_emit", {{"n", n}}};

    prog.layers = {std::move(l1), std::move(l2), std::move(l3)};

    prog.output.rows = 4;
    prog.output.cols = L.d;
    prog.output.add(0, L.c_out0, Rat(1));
    prog.output.add(1, L.c_out1, Rat(1));
    prog.output.add(2, L.c_outdot, Rat(1));
    prog.output.add(3, L.c_outhash, Rat(1));
    prog.finalize();
    return prog;
}

// ---- median by repeated minimum-above ----

UhatProgram median_sorter(size_t n, size_t value_range) {
    if (n < 1) throw std::invalid_argument("median_sorter: n must be >= 1");
    if (value_range < 1)
        throw std::invalid_argument("median_sorter: empty value range");
    register_program_mlps();
    size_t r = value_range;
    size_t vb = 0;      // one-hot value blocks; index 0 is SEP's virtual 0
    size_t out = r + 1; // retrieved value, a separate block so the output
                        // head reads exactly one coordinate per row
    size_t d = out + r;
    long long g = (long long)std::max(n, r);

    UhatProgram prog;
    prog.name = "median-sorter-n" + std::to_string(n) + "-r" +
                std::to_string(r);
    prog.d = d;
    prog.n_max = 2 * n + 2;
    std::vector<std::string> labels;
    for (size_t v = 1; v <= r; ++v) labels.push_back(std::to_string(v));
    labels.push_back("SEP");
    prog.vocab = Alphabet(labels);

    for (size_t v = 1; v <= r; ++v) {
        Activation e(d);
        e[vb + v] = Rat(1);
        prog.embed[std::to_string(v)] = std::move(e);
    }
    Activation sep(d);
    sep[vb + 0] = Rat(1);
    prog.embed["SEP"] = std::move(sep);
    prog.pos.assign(prog.n_max, Activation(d));

    Head h;
    h.k.rows = h.k.cols = d;
    h.q.rows = h.q.cols = d;
    h.v.rows = h.v.cols = d;
    for (size_t c = 0; c <= r; ++c) h.k.add(vb + c, vb + c, Rat(1));
    // comparator on value pairs: the smallest key value above the query's
    // own wins; everything at or below scores -1
    for (size_t i = 0; i <= r; ++i)
        for (size_t j = 0; j <= r; ++j) {
            Rat score = i <= j ? Rat(-1) : Rat(g + (long long)j - (long long)i);
            h.q.add(vb + i, vb + j, score);
        }
    for (size_t v = 1; v <= r; ++v) h.v.add(out + v - 1, vb + v, Rat(1));

    Layer layer;
    layer.heads = {std::move(h)};
    prog.layers.push_back(std::move(layer));

    prog.output.rows = prog.vocab.size();
    prog.output.cols = d;
    for (size_t v = 1; v <= r; ++v)
        prog.output.add(v - 1, out + v - 1, Rat(1));
    prog.finalize();
    return prog;
}

std::vector<std::string> median_sorter_input(const std::vector<size_t>& values,
                                             size_t value_range) {
    if (values.empty())
        throw std::invalid_argument("median_sorter_input: no values");
    std::set<size_t> seen;
    std::vector<std::string> toks;
    for (size_t v : values) {
        if (v < 1 || v > value_range)
            throw std::invalid_argument("median_sorter_input: value " +
                                        std::to_string(v) + " out of range");
        if (!seen.insert(v).second)
            throw std::invalid_argument("median_sorter_input: duplicate value " +
                                        std::to_string(v));
        toks.push_back(std::to_string(v));
    }
    toks.push_back("SEP");
    return toks;
}

void register_program_mlps() {
    static const bool done = [] {
        register_mlp("tm_step", build_tm_step);
        register_mlp("and_flags", build_and_flags);
        register_mlp("parity_prepare", build_parity_prepare);
        register_mlp("parity_match", build_parity_match);
        register_mlp("parity_emit", build_parity_emit);
        return true;
    }();
    (void)done;
}

} // namespace cotlab
