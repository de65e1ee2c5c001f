#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kwsum/jsonl.hpp"
#include "kwsum/pos.hpp"
#include "kwsum/rng.hpp"
#include "kwsum/tokenizer.hpp"

namespace kwsum {

struct DocumentPair {
    std::string id;
    std::string body;
    std::string gold_summary;
};

struct IngestResult {
    std::vector<DocumentPair> pairs;
    long skipped = 0;
};

struct KeywordSet {
    std::vector<std::string> words;  // first-occurrence order, duplicates kept
    KeywordClasses classes = KeywordClasses::NounsAndVerbs;
    double source_ratio = 1.0;       // fraction of sentences the keywords came from
};

struct MultipleChoiceExample {
    std::vector<TokenSequence> rows; // 4 rows, each padded to the same length
    TokenSequence lm_labels;         // aligned to the gold row; mask_label elsewhere
    int mc_label = 0;                // index of the gold row
};

// Reads a JSONL corpus of {"id","body","abstract"} objects. Pairs whose body
// or abstract normalizes to nothing are skipped and counted.
inline IngestResult ingest_corpus(const std::string& path) {
    IngestResult result;
    for_each_jsonl(path, [&](long line_no, const nlohmann::json& obj) {
        for (const char* field : {"id", "body", "abstract"}) {
            if (!obj.contains(field) || !obj[field].is_string()) {
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": missing string field '" + field + "'");
            }
        }
        DocumentPair pair{obj["id"].get<std::string>(), obj["body"].get<std::string>(),
                          obj["abstract"].get<std::string>()};
        if (words(pair.body).empty() || words(pair.gold_summary).empty()) {
            ++result.skipped;
            return;
        }
        result.pairs.push_back(std::move(pair));
    });
    if (result.pairs.empty()) throw DataError("no usable pairs");
    return result;
}

// Words of the text whose tag matches the class filter, original order,
// duplicates kept.
inline KeywordSet extract_keywords(const std::string& text, KeywordClasses classes,
                                   const PosTagger& tagger) {
    KeywordSet set;
    set.classes = classes;
    for (auto& w : words(text)) {
        if (matches(classes, tagger(w))) set.words.push_back(std::move(w));
    }
    return set;
}

// n gold summaries from distinct pairs other than gold_index, drawn by the
// seeded generator.
inline std::vector<std::string> sample_distractors(const std::vector<DocumentPair>& pairs,
                                                   int gold_index, int n, std::uint64_t seed) {
    if (static_cast<int>(pairs.size()) < n + 1) {
        throw DataError("corpus too small for distractors");
    }
    std::vector<int> pool;
    pool.reserve(pairs.size() - 1);
    for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
        if (i != gold_index) pool.push_back(i);
    }
    Rng rng(seed);
    const auto picks = rng.sample_without_replacement(static_cast<int>(pool.size()), n);
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(n));
    for (const int p : picks) {
        out.push_back(pairs[static_cast<size_t>(pool[static_cast<size_t>(p)])].gold_summary);
    }
    return out;
}

namespace detail {

// [BOS] keywords [SUM] candidate [EOS], truncated from the right to max_len,
// padded to max_len. Keywords are never cut in favor of the candidate; if the
// keywords alone leave no room, they are cut to max_len - 3 first.
inline TokenSequence layout_row(const TokenSequence& keyword_ids, const TokenSequence& cand_ids,
                                int max_len, size_t* sum_pos_out) {
    TokenSequence kw = keyword_ids;
    const auto kw_cap = static_cast<size_t>(max_len - 3);
    if (kw.size() > kw_cap) kw.resize(kw_cap);

    TokenSequence row;
    row.reserve(static_cast<size_t>(max_len));
    row.push_back(special::bos);
    row.insert(row.end(), kw.begin(), kw.end());
    *sum_pos_out = row.size();
    row.push_back(special::sum);
    row.insert(row.end(), cand_ids.begin(), cand_ids.end());
    row.push_back(special::eos);
    if (row.size() > static_cast<size_t>(max_len)) row.resize(static_cast<size_t>(max_len));

    const bool has_candidate_token =
        row.size() > *sum_pos_out + 1 && row[*sum_pos_out + 1] != special::eos;
    if (!has_candidate_token) throw DataError("no room for summary");

    row.resize(static_cast<size_t>(max_len), special::pad);
    return row;
}

} // namespace detail

// Assembles the 4-row example of Figure-1 shape: one gold row at a seeded
// uniform position, three distractor rows, labels on the gold summary span.
inline MultipleChoiceExample build_example(const KeywordSet& keywords, const std::string& gold,
                                           const std::vector<std::string>& distractors,
                                           const Vocab& vocab, int max_len, std::uint64_t seed) {
    if (max_len < 8) throw std::invalid_argument("build_example: max_len must be >= 8");
    if (distractors.size() != 3) {
        throw std::invalid_argument("build_example: expected exactly 3 distractors");
    }

    std::string joined;
    for (const auto& w : keywords.words) {
        if (!joined.empty()) joined.push_back(' ');
        joined += w;
    }
    const TokenSequence kw_ids = encode(joined, vocab);

    Rng rng(seed);
    const int n_rows = static_cast<int>(distractors.size()) + 1;
    const int gold_pos = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_rows)));

    MultipleChoiceExample ex;
    ex.mc_label = gold_pos;
    size_t gold_sum_pos = 0;
    int next_distractor = 0;
    for (int r = 0; r < n_rows; ++r) {
        size_t sum_pos = 0;
        const std::string& cand =
            r == gold_pos ? gold : distractors[static_cast<size_t>(next_distractor++)];
        ex.rows.push_back(detail::layout_row(kw_ids, encode(cand, vocab), max_len, &sum_pos));
        if (r == gold_pos) gold_sum_pos = sum_pos;
    }

    // Label position i targets input i+1; targets exist only on the gold
    // summary span (after the separator, through EOS when present).
    const TokenSequence& gold_row = ex.rows[static_cast<size_t>(gold_pos)];
    size_t last_real = gold_row.size();
    while (last_real > 0 && gold_row[last_real - 1] == special::pad) --last_real;
    ex.lm_labels.assign(gold_row.size(), special::mask_label);
    for (size_t i = 0; i + 1 < gold_row.size(); ++i) {
        const size_t target = i + 1;
        if (target > gold_sum_pos && target < last_real) {
            ex.lm_labels[i] = gold_row[target];
        }
    }
    return ex;
}

// Dataset record persisted to JSONL: the example plus provenance.
struct PreparedExample {
    std::string id;
    KeywordSet keywords;
    MultipleChoiceExample example;
};

inline nlohmann::json to_json(const PreparedExample& pe) {
    nlohmann::json j;
    j["id"] = pe.id;
    j["keywords"] = pe.keywords.words;
    j["classes"] = to_string(pe.keywords.classes);
    j["source_ratio"] = pe.keywords.source_ratio;
    j["rows"] = pe.example.rows;
    j["lm_labels"] = pe.example.lm_labels;
    j["mc_label"] = pe.example.mc_label;
    return j;
}

inline PreparedExample prepared_example_from_json(const nlohmann::json& j) {
    PreparedExample pe;
    pe.id = j.at("id").get<std::string>();
    pe.keywords.words = j.at("keywords").get<std::vector<std::string>>();
    pe.keywords.classes = keyword_classes_from_string(j.at("classes").get<std::string>());
    pe.keywords.source_ratio = j.at("source_ratio").get<double>();
    pe.example.rows = j.at("rows").get<std::vector<TokenSequence>>();
    pe.example.lm_labels = j.at("lm_labels").get<TokenSequence>();
    pe.example.mc_label = j.at("mc_label").get<int>();
    return pe;
}

inline void save_examples(const std::vector<PreparedExample>& examples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file: " + path);
    for (const auto& pe : examples) out << to_json(pe).dump() << '\n';
}

inline std::vector<PreparedExample> load_examples(const std::string& path) {
    std::vector<PreparedExample> out;
    for_each_jsonl(path, [&](long line_no, const nlohmann::json& obj) {
        try {
            out.push_back(prepared_example_from_json(obj));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    });
    if (out.empty()) throw DataError("dataset file is empty: " + path);
    return out;
}

} // namespace kwsum
