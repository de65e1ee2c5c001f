#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kwsum {

// Word splitting and case folding shared by the tokenizer, the keyword
// extractor, and the scoring side, so that everything is segmented the same
// way. ASCII letters/digits are word characters, ASCII A-Z fold to a-z.
// Non-ASCII code points count as word characters except Latin-1
// punctuation/symbols (U+0080..U+00BF), the General Punctuation block
// (U+2000..U+206F) and the ideographic space; the classification is a fixed
// table, independent of locale.

namespace detail {

inline bool is_word_codepoint(std::uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (cp < 0xC0) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false;
    if (cp == 0x3000) return false;
    return true;
}

// Decodes one UTF-8 code point starting at i; advances i. Malformed bytes
// decode as U+FFFD and consume a single byte.
inline std::uint32_t next_codepoint(std::string_view s, size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int extra = 0;
    std::uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1Fu;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0Fu;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07u;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + static_cast<size_t>(extra) >= s.size()) {
        // not enough continuation bytes
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k <= extra; ++k) {
        const auto b = static_cast<unsigned char>(s[i + static_cast<size_t>(k)]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3Fu);
    }
    i += static_cast<size_t>(extra) + 1;
    return cp;
}

} // namespace detail

// Case-folded words of a text, in order. Punctuation and whitespace separate
// words and are dropped.
inline std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    size_t i = 0;
    while (i < text.size()) {
        const size_t start = i;
        const std::uint32_t cp = detail::next_codepoint(text, i);
        if (detail::is_word_codepoint(cp)) {
            if (cp >= 'A' && cp <= 'Z') {
                cur.push_back(static_cast<char>(cp - 'A' + 'a'));
            } else {
                cur.append(text.substr(start, i - start));
            }
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Words joined by single spaces.
inline std::string normalize(std::string_view text) {
    std::string out;
    for (const auto& w : words(text)) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace kwsum
