#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cotlab {

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                                   line[i] == '\n' || line[i] == '\r'))
            ++i;
        size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
               line[j] != '\n' && line[j] != '\r')
            ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

// One prompt+completion as a flat label sequence with the boundary kept.
// Rendering is single-space-separated, one trace per line.
struct TokenTrace {
    std::vector<std::string> tokens;
    size_t input_len = 0;

    std::string render() const { return join_tokens(tokens); }

    std::vector<std::string> cot() const {
        check();
        return {tokens.begin() + long(input_len), tokens.end()};
    }

    std::vector<std::string> input() const {
        check();
        return {tokens.begin(), tokens.begin() + long(input_len)};
    }

    void check() const {
        if (input_len > tokens.size())
            throw std::logic_error("trace input_len exceeds token count");
        for (const auto& t : tokens)
            if (t.empty() || t.find(' ') != std::string::npos)
                throw std::logic_error("trace token empty or has whitespace");
    }

    static TokenTrace parse(const std::string& line, size_t input_len = 0) {
        TokenTrace tr{split_tokens(line), input_len};
        tr.check();
        return tr;
    }
};

// Explicit token set with stable indices; the interpreter's vocabularies
// and one-hot output rows are keyed by these indices.
struct Alphabet {
    std::vector<std::string> labels;
    std::unordered_map<std::string, size_t> index_of;

    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> ls) : labels(std::move(ls)) {
        for (size_t i = 0; i < labels.size(); ++i) {
            if (!index_of.emplace(labels[i], i).second)
                throw std::invalid_argument("duplicate alphabet label: " +
                                            labels[i]);
        }
    }

    size_t size() const { return labels.size(); }

    bool contains(const std::string& t) const { return index_of.count(t); }

    size_t index(const std::string& t) const {
        auto it = index_of.find(t);
        if (it == index_of.end())
            throw std::out_of_range("token not in alphabet: " + t);
        return it->second;
    }
};

} // namespace cotlab
