#pragma once

// Just enough Unicode for tokenization: UTF-8 decoding, the general
// punctuation categories (Pc Pd Ps Pe Pi Pf Po) and simple lowercasing.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace decoy::text {

/// Decode one code point starting at s[i]; advances i. Malformed bytes
/// decode as U+FFFD and consume a single byte.
inline char32_t next_code_point(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) -> int {
        if (i + k >= s.size()) return -1;
        const auto b = static_cast<unsigned char>(s[i + k]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        const int c = cont(static_cast<std::size_t>(k));
        if (c < 0) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | static_cast<char32_t>(c);
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

namespace detail {

// Punctuation (P*) ranges outside ASCII, from UnicodeData.txt; covers
// Latin, General Punctuation, CJK symbols and the fullwidth forms.
inline constexpr std::array<std::pair<char32_t, char32_t>, 40> punct_ranges{{
    {0x00A1, 0x00A1}, {0x00A7, 0x00A7}, {0x00AB, 0x00AB}, {0x00B6, 0x00B7}, {0x00BB, 0x00BB},
    {0x00BF, 0x00BF}, {0x037E, 0x037E}, {0x0387, 0x0387}, {0x055A, 0x055F}, {0x0589, 0x058A},
    {0x05BE, 0x05BE}, {0x05C0, 0x05C0}, {0x05F3, 0x05F4}, {0x060C, 0x060D}, {0x061B, 0x061F},
    {0x066A, 0x066D}, {0x06D4, 0x06D4}, {0x0964, 0x0965}, {0x2010, 0x2027}, {0x2030, 0x2043},
    {0x2045, 0x2051}, {0x2053, 0x205E}, {0x207D, 0x207E}, {0x208D, 0x208E}, {0x2308, 0x230B},
    {0x2329, 0x232A}, {0x2768, 0x2775}, {0x27C5, 0x27C6}, {0x27E6, 0x27EF}, {0x2983, 0x2998},
    {0x29D8, 0x29DB}, {0x29FC, 0x29FD}, {0x2E00, 0x2E4F}, {0x3001, 0x3003}, {0x3008, 0x3011},
    {0x3014, 0x301F}, {0xFE10, 0xFE19}, {0xFE30, 0xFE52}, {0xFE54, 0xFE6B}, {0xFF01, 0xFF65},
}};

}  // namespace detail

inline bool is_punctuation(char32_t cp) {
    if (cp < 0x80) {
        // ASCII P*: everything ispunct() reports except the symbols $+<=>^`|~
        switch (cp) {
            case '!': case '"': case '#': case '%': case '&': case '\'': case '(': case ')':
            case '*': case ',': case '-': case '.': case '/': case ':': case ';': case '?':
            case '@': case '[': case '\\': case ']': case '_': case '{': case '}':
                return true;
            default:
                return false;
        }
    }
    if (cp >= 0xFF01 && cp <= 0xFF65) {
        // fullwidth block mixes symbols in; keep only the P* members
        switch (cp) {
            case 0xFF04: case 0xFF0B: case 0xFF1C: case 0xFF1D: case 0xFF1E: case 0xFF3E:
            case 0xFF40: case 0xFF5C: case 0xFF5E:
                return false;
            default:
                return !(cp >= 0xFF10 && cp <= 0xFF19) && !(cp >= 0xFF21 && cp <= 0xFF3A) &&
                       !(cp >= 0xFF41 && cp <= 0xFF5A);
        }
    }
    const auto it = std::upper_bound(detail::punct_ranges.begin(), detail::punct_ranges.end(), cp,
                                     [](char32_t v, const auto& r) { return v < r.first; });
    if (it == detail::punct_ranges.begin()) return false;
    const auto& r = *(it - 1);
    return cp >= r.first && cp <= r.second;
}

inline bool is_space(char32_t cp) {
    switch (cp) {
        case ' ': case '\t': case '\n': case '\v': case '\f': case '\r':
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029: case 0x202F: case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

/// Simple lowercase mapping for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
inline char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp < 0x80) return cp;
    if ((cp >= 0xC0 && cp <= 0xDE) && cp != 0xD7) return cp + 32;
    if (cp >= 0x100 && cp <= 0x17F) {
        if (cp == 0x130) return 'i';
        if (cp == 0x138 || cp == 0x17F) return cp;
        if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
        if (cp == 0x178) return 0xFF;
        if (cp >= 0x149 && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
    return cp;
}

/// Apostrophe variants folded onto ASCII '\'' so stopword forms like "i’m" match.
inline char32_t fold_apostrophe(char32_t cp) {
    return (cp == 0x2019 || cp == 0x2018 || cp == 0x02BC || cp == 0xFF07) ? U'\'' : cp;
}

}  // namespace decoy::text
