#include "cotlab/uhat.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace cotlab {

void SparseMat::add(size_t r, size_t c, Rat v) {
    if (r >= rows || c >= cols)
        throw std::out_of_range("sparse entry outside matrix");
    if (v == Rat(0)) return;
    entries.push_back(Entry{r, c, v});
}

Activation SparseMat::apply(const Activation& y) const {
    if (y.size() != cols)
        throw std::invalid_argument("matrix/vector size mismatch");
    Activation out(rows, Rat(0));
    for (const Entry& e : entries) out[e.r] += e.v * y[e.c];
    return out;
}

namespace {

std::unordered_map<std::string, MlpBuilder>& mlp_registry() {
    static std::unordered_map<std::string, MlpBuilder> reg = {
        {"identity",
         [](const nlohmann::json&) -> MlpFn {
             return [](const Activation& y) { return y; };
         }},
    };
    return reg;
}

// keys are kept sparse: hand constructions produce keys with a handful of
// nonzeros, and the score loop over all earlier positions is the hot path
using SparseVec = std::vector<std::pair<size_t, Rat>>;

SparseVec sparsify(const Activation& y) {
    SparseVec out;
    for (size_t i = 0; i < y.size(); ++i)
        if (y[i] != Rat(0)) out.emplace_back(i, y[i]);
    return out;
}

Rat dot_sparse(const SparseVec& key, const Activation& q) {
    Rat s(0);
    for (const auto& [i, v] : key) s += v * q[i];
    return s;
}

Rat dot(const Activation& a, const Activation& b) {
    Rat s(0);
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

void register_mlp(const std::string& name, MlpBuilder builder) {
    if (!mlp_registry().emplace(name, std::move(builder)).second)
        throw std::logic_error("mlp already registered: " + name);
}

MlpFn build_mlp(const std::string& name, const nlohmann::json& params) {
    auto it = mlp_registry().find(name);
    if (it == mlp_registry().end()) {
        std::string known;
        for (const auto& [k, v] : mlp_registry()) known += " " + k;
        throw std::invalid_argument("unknown mlp '" + name + "'; registered:" +
                                    known);
    }
    return it->second(params);
}

std::vector<std::string> registered_mlps() {
    std::vector<std::string> names;
    for (const auto& [k, v] : mlp_registry()) names.push_back(k);
    std::sort(names.begin(), names.end());
    return names;
}

void UhatProgram::finalize() {
    if (d == 0) throw std::logic_error("program width is zero");
    if (n_max == 0) throw std::logic_error("program context bound is zero");
    if (pos.size() != n_max)
        throw std::logic_error("positional table must cover exactly n_max");
    for (const auto& p : pos)
        if (p.size() != d) throw std::logic_error("positional vector width");
    if (vocab.size() == 0) throw std::logic_error("empty vocabulary");
    for (const auto& [tok, e] : embed) {
        if (!vocab.contains(tok))
            throw std::logic_error("embedding for token outside vocab: " + tok);
        if (e.size() != d) throw std::logic_error("embedding width: " + tok);
    }
    for (const auto& tok : vocab.labels)
        if (!embed.count(tok))
            throw std::logic_error("token lacks embedding: " + tok);
    for (auto& layer : layers) {
        if (layer.heads.empty()) throw std::logic_error("layer with no heads");
        for (const auto& h : layer.heads)
            for (const SparseMat* m : {&h.k, &h.q, &h.v})
                if (m->rows != d || m->cols != d)
                    throw std::logic_error("head matrices must be d x d");
        layer.mlp = build_mlp(layer.mlp_spec.name, layer.mlp_spec.params);
    }
    if (output.rows != vocab.size() || output.cols != d)
        throw std::logic_error("output matrix must be |vocab| x d");
}

VmRun::VmRun(const UhatProgram& prog) : prog_(prog) {
    if (prog_.layers.empty())
        throw std::logic_error("program has no layers");
    keys_.resize(prog_.layers.size());
    for (size_t k = 0; k < prog_.layers.size(); ++k)
        keys_[k].resize(prog_.layers[k].heads.size());
    transcript_.acts.resize(prog_.layers.size() + 1);
}

void VmRun::append(const std::string& token) {
    size_t t = transcript_.tokens.size();
    if (t >= prog_.n_max)
        throw ContextOverflow("trace length would exceed n_max=" +
                              std::to_string(prog_.n_max) + " in program " +
                              prog_.name);
    auto eit = prog_.embed.find(token);
    if (eit == prog_.embed.end())
        throw std::out_of_range("token without embedding: " + token);
    transcript_.tokens.push_back(token);

    Activation y(prog_.d);
    for (size_t c = 0; c < prog_.d; ++c)
        y[c] = eit->second[c] + prog_.pos[t][c];
    transcript_.acts[0].push_back(y);

    std::vector<std::vector<size_t>> chosen_here;
    for (size_t k = 0; k < prog_.layers.size(); ++k) {
        const Layer& layer = prog_.layers[k];
        const Activation& yin = transcript_.acts[k][t];
        Activation ypre = yin;
        std::vector<size_t> head_choices;
        for (size_t h = 0; h < layer.heads.size(); ++h) {
            const Head& head = layer.heads[h];
            keys_[k][h].push_back(sparsify(head.k.apply(yin)));
            Activation q = head.q.apply(yin);
            size_t best = 0;
            Rat best_score = dot_sparse(keys_[k][h][0], q);
            for (size_t j = 1; j <= t; ++j) {
                Rat s = dot_sparse(keys_[k][h][j], q);
                bool better = prog_.tie_break == TieBreak::leftmost
                                  ? s > best_score
                                  : s >= best_score;
                if (better) {
                    best = j;
                    best_score = s;
                }
            }
            head_choices.push_back(best);
            Activation val = head.v.apply(transcript_.acts[k][best]);
            for (size_t c = 0; c < prog_.d; ++c) ypre[c] += val[c];
        }
        chosen_here.push_back(std::move(head_choices));
        Activation yout = layer.mlp(ypre);
        if (yout.size() != prog_.d)
            throw std::logic_error("mlp changed activation width");
        transcript_.acts[k + 1].push_back(std::move(yout));
    }
    transcript_.attended.push_back(std::move(chosen_here));
}

std::vector<Rat> VmRun::output_at(size_t i) const {
    if (i >= size()) throw std::out_of_range("position beyond trace");
    return prog_.output.apply(transcript_.acts.back()[i]);
}

std::vector<Rat> VmRun::output_last() const {
    if (size() == 0) throw std::logic_error("empty trace has no output");
    return output_at(size() - 1);
}

namespace {

// argmax row, first index on exact ties, plus an exact one-hot check
StepResult summarize_output(const UhatProgram& prog, std::vector<Rat> out) {
    StepResult r;
    r.index = 0;
    size_t ones = 0;
    bool clean = true;
    for (size_t i = 0; i < out.size(); ++i) {
        if (out[i] > out[r.index]) r.index = i;
        if (out[i] == Rat(1))
            ++ones;
        else if (out[i] != Rat(0))
            clean = false;
    }
    r.one_hot = clean && ones == 1;
    r.token = prog.vocab.labels.at(r.index);
    r.output = std::move(out);
    return r;
}

} // namespace

StepResult vm_step(const UhatProgram& prog,
                   const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw std::invalid_argument("step needs a token");
    VmRun run(prog);
    for (const auto& t : tokens) run.append(t);
    return summarize_output(prog, run.output_last());
}

DecodeResult vm_decode(const UhatProgram& prog,
                       const std::vector<std::string>& input,
                       const StopRule& stop) {
    if (input.empty()) throw std::invalid_argument("decode needs an input");
    if (stop.stop_labels.empty() && stop.max_steps == 0)
        throw std::invalid_argument("decode needs a stop label or step cap");
    VmRun run(prog);
    for (const auto& t : input) run.append(t);
    DecodeResult res;
    res.trace.input_len = input.size();
    for (size_t steps = 0;; ++steps) {
        if (stop.max_steps && steps >= stop.max_steps) break;
        StepResult s = summarize_output(prog, run.output_last());
        if (!s.one_hot) res.all_outputs_one_hot = false;
        run.append(s.token);
        if (stop.stop_labels.count(s.token)) {
            res.stopped_on_label = true;
            break;
        }
    }
    res.trace.tokens = run.transcript().tokens;
    res.transcript = run.transcript();
    return res;
}

std::vector<std::vector<Rat>> attention_scores(
    const UhatProgram& prog, const std::vector<std::string>& tokens,
    size_t layer, size_t head) {
    if (layer < 1 || layer > prog.layers.size())
        throw std::out_of_range("layer index (1-based) out of range");
    if (head >= prog.layers[layer - 1].heads.size())
        throw std::out_of_range("head index out of range");
    VmRun run(prog);
    for (const auto& t : tokens) run.append(t);
    const Head& h = prog.layers[layer - 1].heads[head];
    const auto& acts = run.transcript().acts[layer - 1];
    std::vector<Activation> keys;
    keys.reserve(acts.size());
    for (const auto& y : acts) keys.push_back(h.k.apply(y));
    std::vector<std::vector<Rat>> scores(acts.size());
    for (size_t i = 0; i < acts.size(); ++i) {
        Activation q = h.q.apply(acts[i]);
        scores[i].reserve(i + 1);
        for (size_t j = 0; j <= i; ++j) scores[i].push_back(dot(keys[j], q));
    }
    return scores;
}

bool check_one_hot_output(const UhatProgram& prog, const TokenTrace& trace) {
    trace.check();
    if (trace.input_len == 0 || trace.input_len >= trace.tokens.size())
        throw std::invalid_argument("trace needs an input and a completion");
    VmRun run(prog);
    for (const auto& t : trace.tokens) run.append(t);
    for (size_t i = trace.input_len - 1; i + 1 < trace.tokens.size(); ++i) {
        StepResult s = summarize_output(prog, run.output_at(i));
        if (!s.one_hot) return false;
    }
    return true;
}

std::vector<std::string> vm_predict_all(const UhatProgram& prog,
                                        const TokenTrace& trace) {
    trace.check();
    if (trace.input_len == 0)
        throw std::invalid_argument("trace needs a nonempty input");
    VmRun run(prog);
    for (const auto& t : trace.tokens) run.append(t);
    std::vector<std::string> out;
    for (size_t i = trace.input_len - 1; i + 1 < trace.tokens.size(); ++i)
        out.push_back(summarize_output(prog, run.output_at(i)).token);
    return out;
}

std::string transcript_csv(const Transcript& t) {
    std::ostringstream os;
    os << "position,token,layer,head,attended,attended_token\n";
    for (size_t i = 0; i < t.tokens.size(); ++i)
        for (size_t k = 0; k < t.attended[i].size(); ++k)
            for (size_t h = 0; h < t.attended[i][k].size(); ++h) {
                size_t j = t.attended[i][k][h];
                os << (i + 1) << ',' << t.tokens[i] << ',' << (k + 1) << ','
                   << (h + 1) << ',' << (j + 1) << ',' << t.tokens[j] << '\n';
            }
    return os.str();
}

namespace {

nlohmann::json sparse_to_json(const SparseMat& m) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : m.entries)
        entries.push_back({e.r, e.c, e.v.str()});
    return {{"rows", m.rows}, {"cols", m.cols}, {"entries", entries}};
}

SparseMat sparse_from_json(const nlohmann::json& j) {
    SparseMat m;
    m.rows = j.at("rows").get<size_t>();
    m.cols = j.at("cols").get<size_t>();
    for (const auto& e : j.at("entries")) {
        m.add(e.at(0).get<size_t>(), e.at(1).get<size_t>(),
              Rat::parse(e.at(2).get<std::string>()));
    }
    return m;
}

nlohmann::json vec_to_json(const Activation& v) {
    nlohmann::json nz = nlohmann::json::object();
    for (size_t i = 0; i < v.size(); ++i)
        if (v[i] != Rat(0)) nz[std::to_string(i)] = v[i].str();
    return nz;
}

Activation vec_from_json(const nlohmann::json& j, size_t d) {
    Activation v(d, Rat(0));
    for (auto it = j.begin(); it != j.end(); ++it) {
        size_t i = std::stoull(it.key());
        if (i >= d) throw std::out_of_range("vector entry beyond width");
        v[i] = Rat::parse(it.value().get<std::string>());
    }
    return v;
}

} // namespace

nlohmann::json program_to_json(const UhatProgram& prog) {
    nlohmann::json j;
    j["name"] = prog.name;
    j["d"] = prog.d;
    j["n_max"] = prog.n_max;
    j["tie_break"] =
        prog.tie_break == TieBreak::leftmost ? "leftmost" : "rightmost";
    j["vocab"] = prog.vocab.labels;
    nlohmann::json emb = nlohmann::json::object();
    for (const auto& [tok, v] : prog.embed) emb[tok] = vec_to_json(v);
    j["embed"] = emb;
    nlohmann::json pos = nlohmann::json::array();
    for (const auto& v : prog.pos) pos.push_back(vec_to_json(v));
    j["pos"] = pos;
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : prog.layers) {
        nlohmann::json heads = nlohmann::json::array();
        for (const auto& h : layer.heads)
            heads.push_back({{"k", sparse_to_json(h.k)},
                             {"q", sparse_to_json(h.q)},
                             {"v", sparse_to_json(h.v)}});
        layers.push_back({{"heads", heads},
                          {"mlp", {{"name", layer.mlp_spec.name},
                                   {"params", layer.mlp_spec.params}}}});
    }
    j["layers"] = layers;
    j["output"] = sparse_to_json(prog.output);
    return j;
}

UhatProgram program_from_json(const nlohmann::json& j) {
    UhatProgram prog;
    prog.name = j.at("name").get<std::string>();
    prog.d = j.at("d").get<size_t>();
    prog.n_max = j.at("n_max").get<size_t>();
    std::string tb = j.at("tie_break").get<std::string>();
    if (tb == "leftmost")
        prog.tie_break = TieBreak::leftmost;
    else if (tb == "rightmost")
        prog.tie_break = TieBreak::rightmost;
    else
        throw std::invalid_argument("tie_break must be leftmost/rightmost");
    prog.vocab = Alphabet(j.at("vocab").get<std::vector<std::string>>());
    for (auto it = j.at("embed").begin(); it != j.at("embed").end(); ++it)
        prog.embed[it.key()] = vec_from_json(it.value(), prog.d);
    for (const auto& v : j.at("pos"))
        prog.pos.push_back(vec_from_json(v, prog.d));
    for (const auto& lj : j.at("layers")) {
        Layer layer;
        for (const auto& hj : lj.at("heads")) {
            Head h;
            h.k = sparse_from_json(hj.at("k"));
            h.q = sparse_from_json(hj.at("q"));
            h.v = sparse_from_json(hj.at("v"));
            layer.heads.push_back(std::move(h));
        }
        layer.mlp_spec.name = lj.at("mlp").at("name").get<std::string>();
        layer.mlp_spec.params = lj.at("mlp").at("params");
        prog.layers.push_back(std::move(layer));
    }
    prog.output = sparse_from_json(j.at("output"));
    prog.finalize();
    return prog;
}

} // namespace cotlab
