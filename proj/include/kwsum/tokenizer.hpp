#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "kwsum/errors.hpp"
#include "kwsum/text.hpp"

namespace kwsum {

using TokenSequence = std::vector<int>;

// Reserved ids. Every vocabulary places these six first, in this order.
namespace special {
inline constexpr int bos = 0;        // sequence start
inline constexpr int eos = 1;        // sequence end, read by the choice head
inline constexpr int pad = 2;        // fill to fixed length
inline constexpr int sum = 3;        // separates keywords from the summary
inline constexpr int unk = 4;        // out-of-vocabulary word
inline constexpr int mask_label = 5; // ignored position in label sequences
inline constexpr int count = 6;
} // namespace special

inline const std::array<std::string, 6>& special_literals() {
    static const std::array<std::string, 6> lits = {
        "<BOS>", "<EOS>", "<pad>", "<S>", "<unk>", "<masked>"};
    return lits;
}

// Word-level vocabulary. Immutable once built; safe to share across threads.
struct Vocab {
    std::unordered_map<std::string, int> token_to_id;
    std::vector<std::string> id_to_token;

    int bos_id = special::bos;
    int eos_id = special::eos;
    int pad_id = special::pad;
    int sum_id = special::sum;
    int unk_id = special::unk;
    int mask_label_id = special::mask_label;

    int size() const { return static_cast<int>(id_to_token.size()); }
};

// Builds a vocabulary over the (max_size - 6) most frequent words of the
// corpus. Ties break lexicographically; word ids start at 6 in rank order.
inline Vocab build_vocab(const std::vector<std::string>& corpus, int max_size) {
    if (max_size < special::count + 1) {
        throw std::invalid_argument("build_vocab: max_size must be at least 7");
    }
    if (corpus.empty()) throw DataError("empty corpus");

    std::map<std::string, long> freq; // ordered map makes the tie-break scan deterministic
    for (const auto& doc : corpus) {
        for (auto& w : words(doc)) ++freq[w];
    }
    if (freq.empty()) throw DataError("empty corpus");

    std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocab v;
    for (const auto& lit : special_literals()) {
        v.token_to_id.emplace(lit, static_cast<int>(v.id_to_token.size()));
        v.id_to_token.push_back(lit);
    }
    const auto n_words = std::min<size_t>(ranked.size(), static_cast<size_t>(max_size - special::count));
    for (size_t i = 0; i < n_words; ++i) {
        v.token_to_id.emplace(ranked[i].first, static_cast<int>(v.id_to_token.size()));
        v.id_to_token.push_back(ranked[i].first);
    }
    return v;
}

// Total on strings: unknown words map to unk, specials are never produced
// (their literals split into ordinary words).
inline TokenSequence encode(std::string_view text, const Vocab& v) {
    TokenSequence ids;
    for (const auto& w : words(text)) {
        const auto it = v.token_to_id.find(w);
        ids.push_back(it != v.token_to_id.end() && it->second >= special::count ? it->second
                                                                                : v.unk_id);
    }
    return ids;
}

inline std::string decode(const TokenSequence& ids, const Vocab& v) {
    std::string out;
    for (const int id : ids) {
        if (id < 0 || id >= v.size()) {
            throw DataError("unknown id " + std::to_string(id));
        }
        if (!out.empty()) out.push_back(' ');
        out += v.id_to_token[static_cast<size_t>(id)];
    }
    return out;
}

// One token per line, line number = id; the first six lines are the special
// literals.
inline void save_vocab(const Vocab& v, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocab file: " + path);
    for (const auto& tok : v.id_to_token) out << tok << '\n';
}

inline Vocab load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocab file: " + path);
    Vocab v;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        v.token_to_id.emplace(line, static_cast<int>(v.id_to_token.size()));
        v.id_to_token.push_back(line);
    }
    if (v.size() < special::count + 1) throw DataError("vocab file too small: " + path);
    for (int i = 0; i < special::count; ++i) {
        if (v.id_to_token[static_cast<size_t>(i)] != special_literals()[static_cast<size_t>(i)]) {
            throw DataError("vocab file missing special token at line " + std::to_string(i + 1));
        }
    }
    return v;
}

} // namespace kwsum
