#pragma once

// English Snowball ("Porter2") stemmer. Operates on lowercase words;
// bytes outside ASCII are treated as non-vowels and pass through.

#include <array>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

namespace decoy::text {

namespace porter2_detail {

inline bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

inline bool is_double(std::string_view w) {
    if (w.size() < 2) return false;
    const char a = w[w.size() - 1];
    if (a != w[w.size() - 2]) return false;
    switch (a) {
        case 'b': case 'd': case 'f': case 'g': case 'm': case 'n': case 'p': case 'r': case 't':
            return true;
        default:
            return false;
    }
}

inline bool is_li_ending(char c) {
    switch (c) {
        case 'c': case 'd': case 'e': case 'g': case 'h': case 'k': case 'm': case 'n': case 'r': case 't':
            return true;
        default:
            return false;
    }
}

inline bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

struct regions {
    std::size_t r1;
    std::size_t r2;
};

inline std::size_t region_after(std::string_view w, std::size_t start) {
    for (std::size_t i = start + 1; i < w.size(); ++i)
        if (!is_vowel(w[i]) && is_vowel(w[i - 1])) return i + 1;
    return w.size();
}

inline regions find_regions(std::string_view w) {
    std::size_t r1 = std::string_view::npos;
    for (std::string_view prefix : {"gener", "commun", "arsen", "past", "univers", "later", "emerg", "organ", "inter"}) {
        if (w.substr(0, prefix.size()) == prefix) {
            r1 = prefix.size();
            break;
        }
    }
    if (r1 == std::string_view::npos) r1 = region_after(w, 0);
    const std::size_t r2 = r1 >= w.size() ? w.size() : region_after(w, r1);
    return {r1, r2};
}

// Short syllable ending at position `end` (exclusive).
inline bool ends_short_syllable(std::string_view w, std::size_t end) {
    // "past" counts as short so that paste/pasted/pasting share a stem
    if (end >= 4 && w.substr(end - 4, 4) == "past") return true;
    if (end == 2) return is_vowel(w[0]) && !is_vowel(w[1]);
    if (end >= 3) {
        const char a = w[end - 3], b = w[end - 2], c = w[end - 1];
        return !is_vowel(a) && is_vowel(b) && !is_vowel(c) && c != 'w' && c != 'x' && c != 'Y';
    }
    return false;
}

inline bool contains_vowel(std::string_view s) {
    for (char c : s)
        if (is_vowel(c)) return true;
    return false;
}

inline void replace_suffix(std::string& w, std::size_t suffix_len, std::string_view repl) {
    w.resize(w.size() - suffix_len);
    w += repl;
}

inline void step0(std::string& w) {
    for (std::string_view s : {"'s'", "'s", "'"}) {
        if (ends_with(w, s)) {
            w.resize(w.size() - s.size());
            return;
        }
    }
}

inline void step1a(std::string& w) {
    if (ends_with(w, "sses")) {
        replace_suffix(w, 4, "ss");
    } else if (ends_with(w, "ied") || ends_with(w, "ies")) {
        replace_suffix(w, 3, w.size() > 4 ? "i" : "ie");
    } else if (ends_with(w, "us") || ends_with(w, "ss")) {
        // unchanged
    } else if (ends_with(w, "s")) {
        if (w.size() >= 2 && contains_vowel(std::string_view(w).substr(0, w.size() - 2))) w.pop_back();
    }
}

inline bool starts_only_with(std::string_view stem, std::initializer_list<std::string_view> words) {
    for (auto w : words)
        if (stem == w) return true;
    return false;
}

inline void step1b(std::string& w, const regions& r) {
    static constexpr std::array<std::string_view, 6> suffixes{"eedly", "ingly", "edly", "eed", "ing", "ed"};
    for (auto s : suffixes) {
        if (!ends_with(w, s)) continue;
        const std::size_t stem_len = w.size() - s.size();
        const std::string_view stem = std::string_view(w).substr(0, stem_len);
        if (s == "eed" || s == "eedly") {
            if (stem_len >= r.r1 && !starts_only_with(stem, {"succ", "proc", "exc"})) replace_suffix(w, s.size(), "ee");
            return;
        }
        if (s == "ing") {
            // dying -> die, and a handful of words that only look inflected
            if (stem_len == 2 && stem[1] == 'y' && !is_vowel(stem[0])) {
                replace_suffix(w, 4, "ie");
                return;
            }
            if (starts_only_with(stem, {"even", "cann", "inn", "earr", "herr", "out"})) return;
        }
        if (!contains_vowel(stem)) return;
        w.resize(stem_len);
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
            w += 'e';
        } else if (is_double(w)) {
            // add, ebb, err keep the double consonant
            if (!(w.size() == 3 && (w[0] == 'a' || w[0] == 'e' || w[0] == 'o'))) w.pop_back();
        } else if (r.r1 == w.size() && ends_short_syllable(w, w.size())) {
            w += 'e';
        }
        return;
    }
}

inline void step1c(std::string& w) {
    if (w.size() > 2 && (w.back() == 'y' || w.back() == 'Y') && !is_vowel(w[w.size() - 2])) w.back() = 'i';
}

inline void step2(std::string& w, const regions& r) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 27> rules{{
        {"ization", "ize"}, {"ational", "ate"}, {"ogist", "og"}, {"fulness", "ful"}, {"ousness", "ous"}, {"iveness", "ive"},
        {"tional", "tion"}, {"biliti", "ble"}, {"lessli", "less"}, {"entli", "ent"}, {"ation", "ate"},
        {"alism", "al"}, {"aliti", "al"}, {"ousli", "ous"}, {"iviti", "ive"}, {"fulli", "ful"},
        {"enci", "ence"}, {"anci", "ance"}, {"abli", "able"}, {"izer", "ize"}, {"ator", "ate"},
        {"alli", "al"}, {"bli", "ble"}, {"ogi", "og"}, {"li", ""},
        {"", ""}, {"", ""},
    }};
    for (const auto& [suffix, repl] : rules) {
        if (suffix.empty()) break;
        if (!ends_with(w, suffix)) continue;
        const std::size_t stem_len = w.size() - suffix.size();
        if (stem_len < r.r1) return;
        if (suffix == "ogi") {
            if (stem_len >= 1 && w[stem_len - 1] == 'l') replace_suffix(w, suffix.size(), repl);
        } else if (suffix == "li") {
            if (stem_len >= 1 && is_li_ending(w[stem_len - 1])) replace_suffix(w, suffix.size(), repl);
        } else {
            replace_suffix(w, suffix.size(), repl);
        }
        return;
    }
}

inline void step3(std::string& w, const regions& r) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 9> rules{{
        {"ational", "ate"}, {"tional", "tion"}, {"alize", "al"}, {"icate", "ic"}, {"iciti", "ic"},
        {"ative", ""}, {"ical", "ic"}, {"ness", ""}, {"ful", ""},
    }};
    for (const auto& [suffix, repl] : rules) {
        if (!ends_with(w, suffix)) continue;
        const std::size_t stem_len = w.size() - suffix.size();
        if (stem_len < r.r1) return;
        if (suffix == "ative" && stem_len < r.r2) return;
        replace_suffix(w, suffix.size(), repl);
        return;
    }
}

inline void step4(std::string& w, const regions& r) {
    static constexpr std::array<std::string_view, 18> suffixes{
        "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism", "ate", "iti", "ous", "ive", "ize",
        "ion", "al", "er", "ic",
    };
    for (auto suffix : suffixes) {
        if (!ends_with(w, suffix)) continue;
        const std::size_t stem_len = w.size() - suffix.size();
        if (stem_len < r.r2) return;
        if (suffix == "ion") {
            if (stem_len >= 1 && (w[stem_len - 1] == 's' || w[stem_len - 1] == 't')) w.resize(stem_len);
        } else {
            w.resize(stem_len);
        }
        return;
    }
}

inline void step5(std::string& w, const regions& r) {
    if (w.empty()) return;
    const std::size_t last = w.size() - 1;
    if (w.back() == 'e') {
        if (last >= r.r2 || (last >= r.r1 && !ends_short_syllable(w, last))) w.pop_back();
    } else if (w.back() == 'l') {
        if (last >= r.r2 && last >= 1 && w[last - 1] == 'l') w.pop_back();
    }
}

inline const std::string* exception1(std::string_view w) {
    static const std::array<std::pair<std::string_view, std::string>, 15> table{{
        {"skis", "ski"}, {"skies", "sky"}, {"idly", "idl"}, {"gently", "gentl"}, {"ugly", "ugli"}, {"early", "earli"}, {"only", "onli"},
        {"singly", "singl"}, {"sky", "sky"}, {"news", "news"}, {"howe", "howe"}, {"atlas", "atlas"},
        {"cosmos", "cosmos"}, {"bias", "bias"}, {"andes", "andes"},
    }};
    for (const auto& [from, to] : table)
        if (w == from) return &to;
    return nullptr;
}

}  // namespace porter2_detail

/// Stem one lowercase, punctuation-free token.
inline std::string stem(std::string_view token) {
    using namespace porter2_detail;
    if (token.size() <= 2) return std::string(token);
    if (const auto* e = exception1(token)) return *e;

    std::string w(token);
    if (!w.empty() && w.front() == '\'') w.erase(0, 1);
    if (w.empty()) return w;

    if (w[0] == 'y') w[0] = 'Y';
    for (std::size_t i = 1; i < w.size(); ++i)
        if (w[i] == 'y' && is_vowel(w[i - 1])) w[i] = 'Y';

    regions r = find_regions(w);
    step0(w);
    step1a(w);
    step1b(w, r);
    step1c(w);
    step2(w, r);
    step3(w, r);
    step4(w, r);
    step5(w, r);

    for (char& c : w)
        if (c == 'Y') c = 'y';
    return w;
}

}  // namespace decoy::text
