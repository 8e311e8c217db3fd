// Command-line frontend. Subcommands cover trace generation and
// verification, the hard-attention interpreter, the Turing machine
// compiler, the Boolean-function measurements, corpus generation, and
// length scaling tables. Measurement subcommands emit CSV; trace
// subcommands emit text or JSON lines.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or precondition
// error, 3 resource cap exceeded (context window or step bound).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cotlab/boolean_lab.hpp"
#include "cotlab/cot_tasks.hpp"
#include "cotlab/datagen.hpp"
#include "cotlab/io.hpp"
#include "cotlab/ntt.hpp"
#include "cotlab/rng.hpp"
#include "cotlab/uhat.hpp"
#include "cotlab/uhat_programs.hpp"

using namespace cotlab;

namespace {

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content << std::flush;
    else
        write_file(out_path, content);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

MultJob::Mode parse_mode(const std::string& name) {
    if (name == "schoolbook") return MultJob::Mode::schoolbook;
    if (name == "compact" || name == "ntt-compact")
        return MultJob::Mode::ntt_compact;
    if (name == "butterflies" || name == "ntt-butterflies")
        return MultJob::Mode::ntt_butterflies;
    throw std::invalid_argument("unknown mode: " + name);
}

std::string canonical_mode(MultJob::Mode mode) {
    switch (mode) {
    case MultJob::Mode::schoolbook: return "schoolbook";
    case MultJob::Mode::ntt_compact: return "ntt-compact";
    case MultJob::Mode::ntt_butterflies:
    default: return "ntt-butterflies";
    }
}

Bits random_bits(Rng& rng, size_t n) {
    Bits x(n);
    for (auto& b : x) b = int(rng.below(2));
    return x;
}

// ---- gen-cot / verify-cot ----------------------------------------------

struct GenOpts {
    std::string task;
    size_t n = 0;
    std::string input;   // parity bits / dfa word
    std::string x, y;    // mult operands, binary
    std::string numbers; // median, comma separated
    std::string edges;   // reach, "u-v,u-v"
    std::string query;   // reach, "s-t"
    size_t vertices = 0;
    double edge_prob = 0.5;
    std::string encoding = "decimal";
    unsigned base = 10;
    size_t digits = 3;
    size_t stride = 1;
    std::string mode = "compact";
    size_t count = 1;
    std::string tm_file;
    std::string builtin;
    size_t max_steps = 10000;
};

bool has_explicit_input(const GenOpts& o) {
    if (o.task == "parity" || o.task == "dfa") return !o.input.empty();
    if (o.task == "mult") return !o.x.empty() || !o.y.empty();
    if (o.task == "median") return !o.numbers.empty();
    if (o.task == "reach") return !o.edges.empty();
    return true;
}

ReachInstance::Encoding parse_encoding(const std::string& name) {
    if (name == "decimal") return ReachInstance::Encoding::decimal;
    if (name == "binary") return ReachInstance::Encoding::binary;
    throw std::invalid_argument("unknown encoding: " + name);
}

std::pair<size_t, size_t> parse_pair(const std::string& s) {
    size_t dash = s.find('-');
    if (dash == std::string::npos)
        throw std::invalid_argument("expected \"a-b\", got " + s);
    return {std::stoull(s.substr(0, dash)), std::stoull(s.substr(dash + 1))};
}

// One instance from the flags; random parts draw from rng. The meta layout
// matches the corpus schema so jsonl output feeds cot_job_from_line.
std::pair<CotJob, nlohmann::json> job_from_flags(const GenOpts& o, Rng& rng) {
    if (o.task == "parity" || o.task == "dfa") {
        Bits x;
        if (!o.input.empty()) {
            x = bits_parse(o.input);
            if (o.n != 0 && o.n != x.size())
                throw std::invalid_argument(
                    "--n disagrees with the --input length");
        } else {
            if (o.n == 0)
                throw std::invalid_argument("need --input or --n");
            x = random_bits(rng, o.n);
        }
        if (o.task == "parity")
            return {ParityJob{x, o.stride},
                    {{"n", x.size()}, {"stride", o.stride}}};
        std::vector<std::string> word;
        for (int b : x) word.push_back(b ? "1" : "0");
        return {DfaJob{dfa_parity(), word},
                {{"dfa", "parity"}, {"n", word.size()}}};
    }
    if (o.task == "mult") {
        Bits x, y;
        if (!o.x.empty() || !o.y.empty()) {
            if (o.x.empty() || o.y.empty())
                throw std::invalid_argument("need both --x and --y");
            x = bits_parse(o.x);
            y = bits_parse(o.y);
        } else {
            if (o.n == 0)
                throw std::invalid_argument("need --x/--y or --n");
            x = random_bits(rng, o.n);
            y = random_bits(rng, o.n);
        }
        if (x.size() != y.size())
            throw std::invalid_argument("operands must have equal length");
        MultJob::Mode mode = parse_mode(o.mode);
        NttPlan plan = ntt_plan(mult_ntt_length(x.size()));
        return {MultJob{x, y, mode},
                {{"n", x.size()},
                 {"mode", canonical_mode(mode)},
                 {"transform_length", plan.n},
                 {"p", plan.p},
                 {"omega", plan.omega}}};
    }
    if (o.task == "median") {
        MedianInstance inst;
        inst.base = o.base;
        inst.digits = o.digits;
        if (!o.numbers.empty()) {
            for (const auto& tok : split_csv(o.numbers))
                inst.numbers.push_back(std::stoll(tok));
        } else {
            if (o.n == 0)
                throw std::invalid_argument("need --numbers or --n");
            long long limit = 1;
            for (size_t i = 0; i < o.digits; ++i) limit *= o.base;
            for (size_t i = 0; i < o.n; ++i)
                inst.numbers.push_back(
                    (long long)rng.below(uint64_t(limit)));
        }
        return {MedianJob{inst, o.stride},
                {{"n", inst.numbers.size()},
                 {"base", o.base},
                 {"digits", o.digits},
                 {"stride", o.stride}}};
    }
    if (o.task == "reach") {
        ReachInstance inst;
        inst.encoding = parse_encoding(o.encoding);
        nlohmann::json meta;
        if (!o.edges.empty()) {
            if (o.vertices == 0)
                throw std::invalid_argument(
                    "--edges needs an explicit --vertices");
            if (o.query.empty())
                throw std::invalid_argument("--edges needs --query");
            inst.vertices = o.vertices;
            for (const auto& tok : split_csv(o.edges))
                inst.edges.push_back(parse_pair(tok));
            inst.query = parse_pair(o.query);
        } else {
            if (o.vertices < 2)
                throw std::invalid_argument(
                    "random graphs need --vertices >= 2");
            DagSample dag = gen_dag(o.vertices, o.edge_prob, rng.next());
            QuerySample q = sample_query(dag, rng);
            std::vector<size_t> relabel(dag.vertices);
            for (size_t v = 0; v < dag.vertices; ++v) relabel[v] = v;
            rng.shuffle(relabel);
            inst.vertices = dag.vertices;
            for (const auto& [u, v] : dag.edges)
                inst.edges.push_back({relabel[u], relabel[v]});
            std::sort(inst.edges.begin(), inst.edges.end());
            inst.query = {relabel[q.query.first], relabel[q.query.second]};
            meta["label"] = q.label;
            meta["degenerate"] = q.degenerate;
            meta["wl"] = dag.wl;
        }
        meta["vertices"] = inst.vertices;
        meta["edge_count"] = inst.edges.size();
        meta["encoding"] = o.encoding;
        return {ReachJob{inst}, meta};
    }
    throw std::invalid_argument("unknown task: " + o.task);
}

TuringMachine load_tm(const std::string& file, const std::string& builtin) {
    if (!file.empty() && !builtin.empty())
        throw std::invalid_argument("pass --tm or --builtin, not both");
    if (!file.empty()) return tm_parse(read_file(file));
    if (builtin == "parity") return tm_parity();
    if (builtin == "unary-increment") return tm_unary_increment();
    if (builtin.empty())
        throw std::invalid_argument("need --tm or --builtin");
    throw std::invalid_argument("unknown builtin machine: " + builtin);
}

// words come space separated; a contiguous token explodes into single-char
// symbols when every character is one ("101" for a binary alphabet)
std::vector<std::string> tm_word_tokens(const TuringMachine& tm,
                                        const std::string& raw) {
    std::set<std::string> alpha(tm.alphabet.begin(), tm.alphabet.end());
    std::vector<std::string> out;
    for (const auto& tok : split_tokens(raw)) {
        if (alpha.count(tok)) {
            out.push_back(tok);
            continue;
        }
        bool explodes = std::all_of(tok.begin(), tok.end(), [&](char c) {
            return alpha.count(std::string(1, c)) != 0;
        });
        if (!explodes)
            throw std::invalid_argument("unknown tape symbol: " + tok);
        for (char c : tok) out.push_back(std::string(1, c));
    }
    return out;
}

nlohmann::json line_json(const std::string& task, const TokenTrace& tr,
                         const std::vector<std::string>& answer,
                         nlohmann::json meta) {
    return nlohmann::json{{"task", task},
                          {"input", join_tokens(tr.input())},
                          {"cot", join_tokens(tr.cot())},
                          {"answer", join_tokens(answer)},
                          {"meta", std::move(meta)}};
}

int run_gen_cot(const GenOpts& o, uint64_t seed, const std::string& out,
                const std::string& format) {
    std::vector<nlohmann::json> lines;
    if (o.task == "tm") {
        TuringMachine tm = load_tm(o.tm_file, o.builtin);
        auto word = tm_word_tokens(tm, o.input);
        TokenTrace tr = tm_cot_trace(tm, word, o.max_steps);
        lines.push_back(line_json(
            "tm", tr, {tr.tokens.back()},
            {{"machine", tm_render(tm)}, {"max_steps", o.max_steps}}));
    } else {
        size_t count = has_explicit_input(o) ? 1 : o.count;
        for (size_t i = 0; i < count; ++i) {
            Rng rng(split_seed(seed, i));
            auto [job, meta] = job_from_flags(o, rng);
            meta["index"] = i;
            lines.push_back(
                line_json(o.task, cot_generate(job), cot_answer(job), meta));
        }
    }
    if (format == "jsonl") {
        emit(out, corpus_text(lines));
    } else if (format == "text") {
        std::string text;
        for (const auto& line : lines) {
            text += line.at("input").get<std::string>();
            text += ' ';
            text += line.at("cot").get<std::string>();
            text += '\n';
        }
        emit(out, text);
    } else {
        throw std::invalid_argument("gen-cot emits text or jsonl");
    }
    return 0;
}

// tm lines carry their machine in meta, so they verify by regeneration
CotVerdict verify_tm_line(const nlohmann::json& line) {
    TuringMachine tm =
        tm_parse(line.at("meta").at("machine").get<std::string>());
    TokenTrace tr = corpus_line_trace(line);
    if (tr.input_len < 1 || tr.tokens[tr.input_len - 1] != tm.separator)
        return CotVerdict::fail("input does not end with the separator", 0);
    std::vector<std::string> word(tr.tokens.begin(),
                                  tr.tokens.begin() + long(tr.input_len) - 1);
    TokenTrace want = tm_cot_trace(
        tm, word, line.at("meta").at("max_steps").get<size_t>());
    if (want.tokens == tr.tokens && want.input_len == tr.input_len) {
        if (line.contains("answer") &&
            line.at("answer").get<std::string>() != want.tokens.back())
            return CotVerdict::fail(
                "answer field disagrees with the machine", 0);
        return CotVerdict{};
    }
    for (size_t i = 0; i < std::min(want.tokens.size(), tr.tokens.size());
         ++i)
        if (want.tokens[i] != tr.tokens[i])
            return CotVerdict::fail("token mismatch, expected " +
                                        want.tokens[i] + " got " +
                                        tr.tokens[i],
                                    i);
    return CotVerdict::fail("token count mismatch", tr.tokens.size());
}

struct VerifyOpts {
    std::string in;
    std::string trace;
    GenOpts gen; // task flags for --trace mode
};

int run_verify_cot(const VerifyOpts& o, uint64_t seed,
                   const std::string& out, const std::string& format) {
    struct Row {
        size_t index;
        bool ok;
        std::string detail;
    };
    std::vector<Row> rows;

    if (!o.in.empty()) {
        std::istringstream in(read_file(o.in));
        std::string raw;
        size_t index = 0;
        while (std::getline(in, raw)) {
            if (raw.empty()) continue;
            nlohmann::json line = nlohmann::json::parse(raw);
            CotVerdict v;
            if (line.at("task").get<std::string>() == "tm") {
                v = verify_tm_line(line);
            } else {
                CotJob job = cot_job_from_line(line);
                v = cot_verify_generic(job, corpus_line_trace(line));
                if (v.ok && line.contains("answer") &&
                    line.at("answer").get<std::string>() !=
                        join_tokens(cot_answer(job)))
                    v = CotVerdict::fail(
                        "answer field disagrees with the oracle", 0);
            }
            rows.push_back({index++, v.ok, v.detail});
        }
        if (rows.empty())
            throw std::invalid_argument("no lines to verify in " + o.in);
    } else if (!o.trace.empty()) {
        Rng rng(split_seed(seed, 0));
        auto [job, meta] = job_from_flags(o.gen, rng);
        TokenTrace ref = cot_generate(job);
        TokenTrace given = TokenTrace::parse(o.trace, ref.input_len);
        CotVerdict v = cot_verify_generic(job, given);
        rows.push_back({0, v.ok, v.detail});
    } else {
        throw std::invalid_argument("need --in or --trace");
    }

    size_t failures = 0;
    std::string text;
    std::vector<nlohmann::json> jlines;
    for (const auto& r : rows) {
        if (!r.ok) ++failures;
        if (format == "jsonl") {
            jlines.push_back(nlohmann::json{
                {"line", r.index}, {"ok", r.ok}, {"detail", r.detail}});
        } else {
            text += "line " + std::to_string(r.index) +
                    (r.ok ? ": ok" : ": FAIL " + r.detail) + "\n";
        }
    }
    if (format == "jsonl") {
        emit(out, corpus_text(jlines));
    } else {
        text += std::to_string(rows.size() - failures) + "/" +
                std::to_string(rows.size()) + " traces verified\n";
        emit(out, text);
    }
    return failures == 0 ? 0 : 1;
}

// ---- vm-run / compile-tm -----------------------------------------------

struct VmOpts {
    std::string program;
    std::string builtin;
    size_t n = 0;
    size_t range = 9;
    size_t max_word = 8;
    size_t max_steps = 64;
    std::string input;
    size_t steps = 0;
    std::string stop;
    std::string transcript;
};

UhatProgram load_program(const VmOpts& o) {
    if (!o.program.empty() && !o.builtin.empty())
        throw std::invalid_argument("pass --program or --builtin, not both");
    if (!o.program.empty())
        return program_from_json(nlohmann::json::parse(read_file(o.program)));
    if (o.builtin == "and-head") {
        if (o.n == 0) throw std::invalid_argument("and-head needs --n");
        return and_head(o.n);
    }
    if (o.builtin == "parity-dot") {
        if (o.n == 0) throw std::invalid_argument("parity-dot needs --n");
        return parity_dot_by_dot(o.n);
    }
    if (o.builtin == "median-sorter") {
        if (o.n == 0) throw std::invalid_argument("median-sorter needs --n");
        return median_sorter(o.n, o.range);
    }
    if (o.builtin == "tm-parity")
        return tm_compile(tm_parity(), o.max_word, o.max_steps);
    if (o.builtin == "tm-unary-increment")
        return tm_compile(tm_unary_increment(), o.max_word, o.max_steps);
    if (o.builtin.empty())
        throw std::invalid_argument("need --program or --builtin");
    throw std::invalid_argument("unknown builtin program: " + o.builtin);
}

int run_vm(const VmOpts& o, const std::string& out,
           const std::string& format) {
    UhatProgram prog = load_program(o);
    auto input = split_tokens(o.input);
    if (input.empty()) throw std::invalid_argument("need --input tokens");

    StopRule stop;
    if (!o.stop.empty()) {
        for (const auto& label : split_csv(o.stop))
            stop.stop_labels.insert(label);
        stop.max_steps = o.steps;
    } else if (o.steps > 0) {
        stop = StopRule::steps(o.steps);
    } else {
        // default: run until an answer bit or the context fills up
        stop = StopRule{{"0", "1"}, prog.n_max};
    }

    DecodeResult res = vm_decode(prog, input, stop);
    if (!o.transcript.empty())
        write_file(o.transcript, transcript_csv(res.transcript));

    if (format == "jsonl") {
        emit(out, nlohmann::json{
                      {"trace", res.trace.render()},
                      {"input_len", res.trace.input_len},
                      {"stopped_on_label", res.stopped_on_label},
                      {"all_outputs_one_hot", res.all_outputs_one_hot}}
                          .dump() +
                      "\n");
    } else {
        emit(out, res.trace.render() + "\n");
    }
    return 0;
}

struct CompileOpts {
    std::string tm_file;
    std::string builtin;
    size_t max_word = 8;
    size_t max_steps = 64;
};

int run_compile_tm(const CompileOpts& o, const std::string& out) {
    TuringMachine tm = load_tm(o.tm_file, o.builtin);
    UhatProgram prog = tm_compile(tm, o.max_word, o.max_steps);
    emit(out, program_to_json(prog).dump(2) + "\n");
    return 0;
}

// ---- boolean lab ---------------------------------------------------------

struct SensOpts {
    std::string fn;
    size_t n_min = 0, n_max = 0;
    size_t b_bits = 0;
    size_t inputs = 200, flips = 200;
    bool sampled = false;
};

int run_sensitivity(const SensOpts& o, uint64_t seed, const std::string& out) {
    if (o.n_min == 0 || o.n_max < o.n_min)
        throw std::invalid_argument("need --n or --n-min/--n-max");
    std::ostringstream ss;
    CsvWriter csv(ss);
    csv.header({"fn", "n", "k", "value", "stderr", "exact"});

    for (size_t n = o.n_min; n <= o.n_max; ++n) {
        if (o.fn == "parity" || o.fn == "and") {
            BoolFn f = o.fn == "parity" ? parity_fn(n) : and_fn(n);
            Rat s = avg_sensitivity_exact(f);
            csv.row({o.fn, CsvWriter::num(n), "", CsvWriter::num(s.to_double()),
                     "0", s.str()});
        } else if (o.fn == "mult-digit") {
            if (!o.sampled && 2 * n <= 24) {
                auto per_digit = mult_digit_avg_sensitivity_exact(n);
                for (size_t k = 1; k <= per_digit.size(); ++k) {
                    const Rat& s = per_digit[k - 1];
                    csv.row({o.fn, CsvWriter::num(n), CsvWriter::num(k),
                             CsvWriter::num(s.to_double()), "0", s.str()});
                }
            } else {
                for (size_t k = 1; k <= 2 * n; ++k) {
                    auto est = avg_sensitivity_sampled(
                        mult_digit_fn(n, k), o.inputs, o.flips,
                        split_seed(seed, n * 1000 + k));
                    csv.row({o.fn, CsvWriter::num(n), CsvWriter::num(k),
                             CsvWriter::num(est.estimate),
                             CsvWriter::num(est.stderr_), ""});
                }
            }
        } else if (o.fn == "median") {
            if (o.b_bits == 0)
                throw std::invalid_argument("median needs --bits");
            auto est = median_lastdigit_sensitivity(
                n, o.b_bits, o.inputs, o.flips, split_seed(seed, n));
            csv.row({o.fn, CsvWriter::num(n), CsvWriter::num(o.b_bits),
                     CsvWriter::num(est.estimate),
                     CsvWriter::num(est.stderr_), ""});
        } else {
            throw std::invalid_argument("unknown function: " + o.fn);
        }
    }
    emit(out, ss.str());
    return 0;
}

struct FourierOpts {
    size_t n = 12;
    size_t t_min = 2, t_max = 10;
    size_t combos = 100;
    size_t samples = 100000;
    bool exact = false;
};

std::vector<size_t> random_subset(Rng& rng, size_t lo, size_t hi) {
    std::vector<size_t> out;
    for (size_t i = lo; i <= hi; ++i)
        if (rng.bit()) out.push_back(i);
    return out;
}

std::string render_set(const std::vector<size_t>& s) {
    if (s.empty()) return "-";
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += '|';
        out += std::to_string(s[i]);
    }
    return out;
}

int run_fourier(const FourierOpts& o, uint64_t seed, const std::string& out) {
    if (o.t_min < 2 || o.t_max < o.t_min || o.t_max > 2 * o.n)
        throw std::invalid_argument("need 2 <= t-min <= t-max <= 2n");
    std::ostringstream ss;
    CsvWriter csv(ss);
    csv.header({"n", "t", "combo", "a", "b", "c", "estimate", "stderr",
                "samples"});
    for (size_t t = o.t_min; t <= o.t_max; ++t) {
        for (size_t i = 0; i < o.combos; ++i) {
            Rng rng(split_seed(seed, t * 1000000 + i));
            FourierQuery q;
            q.n_bits = o.n;
            q.t = t;
            q.a = random_subset(rng, 1, o.n);
            q.b = random_subset(rng, 1, o.n);
            q.c = random_subset(rng, 1, t - 1);
            double est, err;
            size_t used;
            if (o.exact) {
                est = fourier_correlation_exact(q).to_double();
                err = 0;
                used = 0;
            } else {
                auto fe = fourier_correlation(q, o.samples,
                                              split_seed(seed, i));
                est = fe.estimate;
                err = fe.stderr_;
                used = fe.samples;
            }
            csv.row({CsvWriter::num(o.n), CsvWriter::num(t),
                     CsvWriter::num(i), render_set(q.a), render_set(q.b),
                     render_set(q.c), CsvWriter::num(est),
                     CsvWriter::num(err), CsvWriter::num(used)});
        }
    }
    emit(out, ss.str());
    return 0;
}

struct RestrictOpts {
    std::string fn;
    size_t n = 0;
    size_t k = 0;
    double star_fraction = 0.5;
    size_t budget = 20000;
};

std::string render_restriction(const Restriction& rho) {
    std::string s;
    for (int a : rho.assign) s += a < 0 ? '*' : char('0' + a);
    return s;
}

int run_restrict(const RestrictOpts& o, uint64_t seed,
                 const std::string& out) {
    if (o.n == 0) throw std::invalid_argument("need --n");
    BoolFn f;
    if (o.fn == "parity")
        f = parity_fn(o.n);
    else if (o.fn == "and")
        f = and_fn(o.n);
    else if (o.fn == "mult-digit") {
        if (o.k == 0) throw std::invalid_argument("mult-digit needs --k");
        f = mult_digit_fn(o.n, o.k);
    } else {
        throw std::invalid_argument("unknown function: " + o.fn);
    }

    auto res = restriction_search(f, o.star_fraction, o.budget, seed);
    size_t target =
        size_t(std::ceil(o.star_fraction * double(f.arity)));
    std::string text;
    text += "function: " + f.name + " (arity " +
            std::to_string(f.arity) + ")\n";
    text += "target stars: " + std::to_string(target) + "\n";
    text += "candidates tried: " + std::to_string(res.candidates_tried) +
            "\n";
    if (res.found) {
        text += "found a constancy-forcing restriction with " +
                std::to_string(res.best_stars) + " stars: " +
                render_restriction(res.best) + "\n";
    } else if (res.none_certified) {
        text += "certified: no restriction with even one star forces "
                "constancy\n";
    } else {
        text += "no restriction met the target; widest seen has " +
                std::to_string(res.best_stars) + " stars\n";
    }
    emit(out, text);
    return 0;
}

// ---- datagen / measure-lengths -----------------------------------------

struct DatagenOpts {
    std::string task;
    size_t n = 0;
    size_t train = 50000;
    size_t test = size_t(-1); // unset sentinel; median derives its own
    size_t stride = 1;
    unsigned base = 10;
    size_t digits = 3;
    std::string mode = "compact";
    size_t v_min = 5, v_max = 35;
    double edge_prob = 0.5;
    std::string encoding = "decimal";
    std::string out_dir;
};

int run_datagen(const DatagenOpts& o, uint64_t seed) {
    if (o.out_dir.empty()) throw std::invalid_argument("need --out-dir");
    size_t test = o.test == size_t(-1) ? 10000 : o.test;

    Corpus corpus;
    if (o.task == "median") {
        if (o.test != size_t(-1))
            throw std::invalid_argument(
                "the median test size is (n+10)*20 by construction");
        if (o.n == 0) throw std::invalid_argument("need --n");
        corpus = gen_median_corpus(o.n, o.train, seed, o.stride, o.base,
                                   o.digits);
    } else if (o.task == "parity") {
        if (o.n == 0) throw std::invalid_argument("need --n");
        corpus = gen_parity_corpus(o.n, o.train, test, seed, o.stride);
    } else if (o.task == "mult") {
        if (o.n == 0) throw std::invalid_argument("need --n");
        corpus = gen_mult_corpus(o.n, o.train, test, seed,
                                 parse_mode(o.mode));
    } else if (o.task == "reach") {
        corpus = gen_reach_corpus(o.v_min, o.v_max, o.train, test, seed,
                                  parse_encoding(o.encoding), o.edge_prob);
    } else {
        throw std::invalid_argument("unknown task: " + o.task);
    }

    std::filesystem::create_directories(o.out_dir);
    auto path = [&](const char* name) {
        return (std::filesystem::path(o.out_dir) / name).string();
    };
    write_file(path("train.jsonl"), corpus_text(corpus.train));
    write_file(path("test.jsonl"), corpus_text(corpus.test));
    write_file(path("manifest.json"), corpus.manifest.dump(2) + "\n");
    std::cout << "wrote " << corpus.train.size() << " train and "
              << corpus.test.size() << " test lines to " << o.out_dir
              << "\n";
    return 0;
}

struct LengthOpts {
    std::string task;
    size_t n_min = 0, n_max = 0, n_step = 1;
    size_t samples = 20;
    size_t stride = 1;
    unsigned base = 10;
    size_t digits = 3;
    size_t v_min = 5, v_max = 35;
    size_t count = 1000;
    double edge_prob = 0.5;
    std::string encoding = "decimal";
};

int run_measure_lengths(const LengthOpts& o, uint64_t seed,
                        const std::string& out) {
    std::ostringstream ss;
    CsvWriter csv(ss);

    if (o.task == "reach") {
        csv.header({"task", "vertices", "edges", "cot_length"});
        for (size_t i = 0; i < o.count; ++i) {
            Rng rng(split_seed(seed, i));
            size_t v = o.v_min + rng.below(o.v_max - o.v_min + 1);
            DagSample dag = gen_dag(v, o.edge_prob, rng.next());
            QuerySample q = sample_query(dag, rng);
            ReachInstance inst;
            inst.vertices = dag.vertices;
            inst.edges = dag.edges;
            inst.query = q.query;
            inst.encoding = parse_encoding(o.encoding);
            size_t len = reach_cot_bfs(inst).cot().size();
            csv.row({o.task, CsvWriter::num(v),
                     CsvWriter::num(dag.edges.size()), CsvWriter::num(len)});
        }
        emit(out, ss.str());
        return 0;
    }

    if (o.n_min == 0 || o.n_max < o.n_min)
        throw std::invalid_argument("need --n-min/--n-max");
    csv.header({"task", "n", "samples", "mean_cot", "min_cot", "max_cot"});
    for (size_t n = o.n_min; n <= o.n_max; n += o.n_step) {
        size_t lo = size_t(-1), hi = 0, total = 0;
        for (size_t i = 0; i < o.samples; ++i) {
            Rng rng(split_seed(seed, n * 1000000 + i));
            size_t len;
            if (o.task == "parity") {
                len = parity_cot(random_bits(rng, n), o.stride).cot().size();
            } else if (o.task == "median") {
                long long limit = 1;
                for (size_t d = 0; d < o.digits; ++d) limit *= o.base;
                MedianInstance inst;
                inst.base = o.base;
                inst.digits = o.digits;
                for (size_t j = 0; j < n; ++j)
                    inst.numbers.push_back(
                        (long long)rng.below(uint64_t(limit)));
                len = median_cot(inst, o.stride).cot().size();
            } else {
                MultJob job{random_bits(rng, n), random_bits(rng, n),
                            parse_mode(o.task)};
                len = cot_generate(job).cot().size();
            }
            lo = std::min(lo, len);
            hi = std::max(hi, len);
            total += len;
        }
        csv.row({o.task, CsvWriter::num(n), CsvWriter::num(o.samples),
                 CsvWriter::num(double(total) / double(o.samples)),
                 CsvWriter::num(lo), CsvWriter::num(hi)});
    }
    emit(out, ss.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    register_program_mlps();

    CLI::App app{"chain-of-thought trace toolkit"};
    app.require_subcommand(1);

    uint64_t seed = 0;
    std::string out;
    std::string format = "text";
    app.add_option("--seed", seed, "random seed (default 0)");
    app.add_option("--out", out, "output file (default stdout)");
    app.add_option("--format", format, "text, jsonl, or csv")
        ->check(CLI::IsMember({"text", "jsonl", "csv"}));

    int rc = 0;

    GenOpts gen;
    auto* gen_cmd = app.add_subcommand(
        "gen-cot", "generate chain-of-thought traces");
    gen_cmd->fallthrough();
    gen_cmd->add_option("task", gen.task,
                        "parity, dfa, mult, median, reach, or tm")
        ->required();
    gen_cmd->add_option("--n", gen.n, "instance size");
    gen_cmd->add_option("--input", gen.input, "bits / word");
    gen_cmd->add_option("--x", gen.x, "first operand, binary");
    gen_cmd->add_option("--y", gen.y, "second operand, binary");
    gen_cmd->add_option("--numbers", gen.numbers, "comma separated values");
    gen_cmd->add_option("--edges", gen.edges, "comma separated u-v pairs");
    gen_cmd->add_option("--query", gen.query, "s-t query pair");
    gen_cmd->add_option("--vertices", gen.vertices, "vertex count");
    gen_cmd->add_option("--edge-prob", gen.edge_prob, "edge probability");
    gen_cmd->add_option("--encoding", gen.encoding, "decimal or binary");
    gen_cmd->add_option("--base", gen.base, "median digit base");
    gen_cmd->add_option("--digits", gen.digits, "median digits per number");
    gen_cmd->add_option("--stride", gen.stride, "thought stride");
    gen_cmd->add_option("--mode", gen.mode,
                        "schoolbook, compact, or butterflies");
    gen_cmd->add_option("--count", gen.count, "random instances to emit");
    gen_cmd->add_option("--tm", gen.tm_file, "machine description file");
    gen_cmd->add_option("--builtin", gen.builtin,
                        "parity or unary-increment");
    gen_cmd->add_option("--max-steps", gen.max_steps,
                        "simulation step bound");
    gen_cmd->callback([&] { rc = run_gen_cot(gen, seed, out, format); });

    VerifyOpts ver;
    auto* ver_cmd = app.add_subcommand(
        "verify-cot", "verify traces from a file or the command line");
    ver_cmd->fallthrough();
    ver_cmd->add_option("task", ver.gen.task, "task for --trace mode");
    ver_cmd->add_option("--in", ver.in, "jsonl corpus file");
    ver_cmd->add_option("--trace", ver.trace, "single trace text");
    ver_cmd->add_option("--input", ver.gen.input, "bits / word");
    ver_cmd->add_option("--x", ver.gen.x, "first operand, binary");
    ver_cmd->add_option("--y", ver.gen.y, "second operand, binary");
    ver_cmd->add_option("--numbers", ver.gen.numbers,
                        "comma separated values");
    ver_cmd->add_option("--edges", ver.gen.edges,
                        "comma separated u-v pairs");
    ver_cmd->add_option("--query", ver.gen.query, "s-t query pair");
    ver_cmd->add_option("--vertices", ver.gen.vertices, "vertex count");
    ver_cmd->add_option("--encoding", ver.gen.encoding,
                        "decimal or binary");
    ver_cmd->add_option("--base", ver.gen.base, "median digit base");
    ver_cmd->add_option("--digits", ver.gen.digits,
                        "median digits per number");
    ver_cmd->add_option("--stride", ver.gen.stride, "thought stride");
    ver_cmd->add_option("--mode", ver.gen.mode,
                        "schoolbook, compact, or butterflies");
    ver_cmd->callback(
        [&] { rc = run_verify_cot(ver, seed, out, format); });

    VmOpts vm;
    auto* vm_cmd = app.add_subcommand(
        "vm-run", "decode from a hard-attention program");
    vm_cmd->fallthrough();
    vm_cmd->add_option("--program", vm.program, "program file (json)");
    vm_cmd->add_option("--builtin", vm.builtin,
                       "and-head, parity-dot, median-sorter, tm-parity, or "
                       "tm-unary-increment");
    vm_cmd->add_option("--n", vm.n, "builtin size parameter");
    vm_cmd->add_option("--range", vm.range, "median-sorter value range");
    vm_cmd->add_option("--max-word", vm.max_word, "compiled word capacity");
    vm_cmd->add_option("--max-steps", vm.max_steps,
                       "compiled step capacity");
    vm_cmd->add_option("--input", vm.input, "space separated input tokens")
        ->required();
    vm_cmd->add_option("--steps", vm.steps, "exact number of decode steps");
    vm_cmd->add_option("--stop", vm.stop, "comma separated stop labels");
    vm_cmd->add_option("--transcript", vm.transcript,
                       "write the attention transcript CSV here");
    vm_cmd->callback([&] { rc = run_vm(vm, out, format); });

    CompileOpts comp;
    auto* comp_cmd = app.add_subcommand(
        "compile-tm", "compile a Turing machine to a program file");
    comp_cmd->fallthrough();
    comp_cmd->add_option("--tm", comp.tm_file, "machine description file");
    comp_cmd->add_option("--builtin", comp.builtin,
                         "parity or unary-increment");
    comp_cmd->add_option("--max-word", comp.max_word,
                         "longest input word supported");
    comp_cmd->add_option("--max-steps", comp.max_steps,
                         "most simulation steps supported");
    comp_cmd->callback([&] { rc = run_compile_tm(comp, out); });

    SensOpts sens;
    auto* sens_cmd = app.add_subcommand(
        "sensitivity", "average sensitivity tables");
    sens_cmd->fallthrough();
    sens_cmd->add_option("--fn", sens.fn,
                         "parity, and, mult-digit, or median")
        ->required();
    auto* sens_n = sens_cmd->add_option(
        "--n", sens.n_min, "single size (sets both ends of the range)");
    sens_cmd->add_option("--n-min", sens.n_min, "range start");
    sens_cmd->add_option("--n-max", sens.n_max, "range end");
    sens_cmd->add_option("--bits", sens.b_bits, "bits per median value");
    sens_cmd->add_option("--inputs", sens.inputs, "sampled inputs");
    sens_cmd->add_option("--flips", sens.flips, "sampled flips per input");
    sens_cmd->add_flag("--sampled", sens.sampled,
                       "force sampling even when exact fits");
    sens_cmd->callback([&] {
        if (!sens_n->empty() && sens.n_max == 0) sens.n_max = sens.n_min;
        rc = run_sensitivity(sens, seed, out);
    });

    FourierOpts fou;
    auto* fou_cmd = app.add_subcommand(
        "fourier", "product-digit correlation tables");
    fou_cmd->fallthrough();
    fou_cmd->add_option("--n", fou.n, "operand bits");
    fou_cmd->add_option("--t-min", fou.t_min, "first target digit");
    fou_cmd->add_option("--t-max", fou.t_max, "last target digit");
    fou_cmd->add_option("--combos", fou.combos, "random index sets per digit");
    fou_cmd->add_option("--samples", fou.samples, "Monte Carlo samples");
    fou_cmd->add_flag("--exact", fou.exact, "enumerate instead of sampling");
    fou_cmd->callback([&] { rc = run_fourier(fou, seed, out); });

    RestrictOpts res;
    auto* res_cmd = app.add_subcommand(
        "restrict", "search for constancy-forcing restrictions");
    res_cmd->fallthrough();
    res_cmd->add_option("--fn", res.fn, "parity, and, or mult-digit")
        ->required();
    res_cmd->add_option("--n", res.n, "arity parameter")->required();
    res_cmd->add_option("--k", res.k, "product digit for mult-digit");
    res_cmd->add_option("--star-fraction", res.star_fraction,
                        "required fraction of free positions");
    res_cmd->add_option("--budget", res.budget, "candidates to try");
    res_cmd->callback([&] { rc = run_restrict(res, seed, out); });

    DatagenOpts dg;
    auto* dg_cmd = app.add_subcommand(
        "datagen", "emit train/test corpora with a manifest");
    dg_cmd->fallthrough();
    dg_cmd->add_option("task", dg.task, "median, parity, mult, or reach")
        ->required();
    dg_cmd->add_option("--n", dg.n, "instance size");
    dg_cmd->add_option("--train", dg.train, "train lines (default 50000)");
    dg_cmd->add_option("--test", dg.test, "test lines (default 10000)");
    dg_cmd->add_option("--stride", dg.stride, "thought stride");
    dg_cmd->add_option("--base", dg.base, "median digit base");
    dg_cmd->add_option("--digits", dg.digits, "median digits per number");
    dg_cmd->add_option("--mode", dg.mode,
                       "schoolbook, compact, or butterflies");
    dg_cmd->add_option("--v-min", dg.v_min, "smallest vertex count");
    dg_cmd->add_option("--v-max", dg.v_max, "largest vertex count");
    dg_cmd->add_option("--edge-prob", dg.edge_prob, "edge probability");
    dg_cmd->add_option("--encoding", dg.encoding, "decimal or binary");
    dg_cmd->add_option("--out-dir", dg.out_dir, "output directory")
        ->required();
    dg_cmd->callback([&] { rc = run_datagen(dg, seed); });

    LengthOpts len;
    auto* len_cmd = app.add_subcommand(
        "measure-lengths", "trace length scaling tables");
    len_cmd->fallthrough();
    len_cmd->add_option("task", len.task,
                        "parity, median, schoolbook, compact, butterflies, "
                        "or reach")
        ->required();
    len_cmd->add_option("--n-min", len.n_min, "range start");
    len_cmd->add_option("--n-max", len.n_max, "range end");
    len_cmd->add_option("--n-step", len.n_step, "range step");
    len_cmd->add_option("--samples", len.samples, "instances per size");
    len_cmd->add_option("--stride", len.stride, "thought stride");
    len_cmd->add_option("--base", len.base, "median digit base");
    len_cmd->add_option("--digits", len.digits, "median digits per number");
    len_cmd->add_option("--v-min", len.v_min, "smallest vertex count");
    len_cmd->add_option("--v-max", len.v_max, "largest vertex count");
    len_cmd->add_option("--count", len.count, "graph instances");
    len_cmd->add_option("--edge-prob", len.edge_prob, "edge probability");
    len_cmd->add_option("--encoding", len.encoding, "decimal or binary");
    len_cmd->callback([&] { rc = run_measure_lengths(len, seed, out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::length_error& e) {
        // context overflow and step bounds land here
        std::cerr << "resource cap exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
