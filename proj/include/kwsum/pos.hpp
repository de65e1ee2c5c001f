#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace kwsum {

enum class WordTag { Noun, Verb, Other };

enum class KeywordClasses { Nouns, Verbs, NounsAndVerbs };

inline bool matches(KeywordClasses classes, WordTag tag) {
    switch (classes) {
        case KeywordClasses::Nouns: return tag == WordTag::Noun;
        case KeywordClasses::Verbs: return tag == WordTag::Verb;
        case KeywordClasses::NounsAndVerbs: return tag == WordTag::Noun || tag == WordTag::Verb;
    }
    return false;
}

inline std::string to_string(KeywordClasses c) {
    switch (c) {
        case KeywordClasses::Nouns: return "nouns";
        case KeywordClasses::Verbs: return "verbs";
        case KeywordClasses::NounsAndVerbs: return "nouns_and_verbs";
    }
    return "nouns_and_verbs";
}

inline KeywordClasses keyword_classes_from_string(std::string_view s) {
    if (s == "nouns") return KeywordClasses::Nouns;
    if (s == "verbs") return KeywordClasses::Verbs;
    if (s == "nouns_and_verbs" || s == "both") return KeywordClasses::NounsAndVerbs;
    throw std::invalid_argument("unknown keyword class filter: " + std::string(s));
}

// A tagger maps a case-folded word to a tag.
using PosTagger = std::function<WordTag(const std::string&)>;

// Deterministic tagger: explicit lexicon first, then suffix rules
// (-s/-tion/-ity noun, -ize/-ed/-ing verb), noun otherwise.
class LexiconTagger {
public:
    LexiconTagger() = default;
    explicit LexiconTagger(std::unordered_map<std::string, WordTag> lexicon)
        : lexicon_(std::move(lexicon)) {}

    WordTag operator()(const std::string& word) const {
        const auto it = lexicon_.find(word);
        if (it != lexicon_.end()) return it->second;
        if (ends_with(word, "tion") || ends_with(word, "ity") || ends_with(word, "s")) {
            return WordTag::Noun;
        }
        if (ends_with(word, "ize") || ends_with(word, "ed") || ends_with(word, "ing")) {
            return WordTag::Verb;
        }
        return WordTag::Noun;
    }

private:
    static bool ends_with(const std::string& w, std::string_view suffix) {
        return w.size() >= suffix.size() &&
               std::string_view(w).substr(w.size() - suffix.size()) == suffix;
    }

    std::unordered_map<std::string, WordTag> lexicon_;
};

// Small built-in lexicon for common function/verb words so that fixture text
// tags sensibly; everything else falls through to the suffix rules.
inline LexiconTagger default_tagger() {
    static const std::unordered_map<std::string, WordTag> lex = {
        {"is", WordTag::Other},      {"are", WordTag::Other},    {"was", WordTag::Other},
        {"were", WordTag::Other},    {"be", WordTag::Other},     {"been", WordTag::Other},
        {"the", WordTag::Other},     {"a", WordTag::Other},      {"an", WordTag::Other},
        {"of", WordTag::Other},      {"in", WordTag::Other},     {"on", WordTag::Other},
        {"and", WordTag::Other},     {"or", WordTag::Other},     {"to", WordTag::Other},
        {"with", WordTag::Other},    {"by", WordTag::Other},     {"for", WordTag::Other},
        {"from", WordTag::Other},    {"that", WordTag::Other},   {"this", WordTag::Other},
        {"may", WordTag::Other},     {"can", WordTag::Other},    {"not", WordTag::Other},
        {"have", WordTag::Verb},     {"has", WordTag::Verb},     {"had", WordTag::Verb},
        {"cause", WordTag::Verb},    {"causes", WordTag::Verb},  {"show", WordTag::Verb},
        {"shows", WordTag::Verb},    {"include", WordTag::Verb}, {"includes", WordTag::Verb},
        {"require", WordTag::Verb},  {"requires", WordTag::Verb},{"remain", WordTag::Verb},
        {"remains", WordTag::Verb},  {"occur", WordTag::Verb},   {"occurs", WordTag::Verb},
        {"spread", WordTag::Verb},   {"spreads", WordTag::Verb}, {"affect", WordTag::Verb},
        {"affects", WordTag::Verb},  {"reduce", WordTag::Verb},  {"reduces", WordTag::Verb},
        {"improve", WordTag::Verb},  {"improves", WordTag::Verb},{"develop", WordTag::Verb},
        {"develops", WordTag::Verb}, {"carry", WordTag::Verb},   {"carries", WordTag::Verb},
        {"suggest", WordTag::Verb},  {"suggests", WordTag::Verb},{"protect", WordTag::Verb},
        {"protects", WordTag::Verb}, {"target", WordTag::Verb},  {"targets", WordTag::Verb},
    };
    return LexiconTagger(lex);
}

} // namespace kwsum
