#include "storyline/tokenize.hpp"

#include <algorithm>
#include <array>

namespace storyline {

namespace {

struct CpRange {
    char32_t lo, hi;
};

// Letter and digit ranges of the major scripts (general categories L*, N*).
// Sorted by lo; coverage is deliberately coarse outside the Basic
// Multilingual Plane scripts news text actually uses.
constexpr CpRange kWordRanges[] = {
    {0x0030, 0x0039},  // ASCII digits
    {0x0041, 0x005A},  // A-Z
    {0x0061, 0x007A},  // a-z
    {0x00AA, 0x00AA},  // feminine ordinal
    {0x00B2, 0x00B3},  // superscript two/three
    {0x00B5, 0x00B5},  // micro sign
    {0x00B9, 0x00BA},  // superscript one, masculine ordinal
    {0x00BC, 0x00BE},  // vulgar fractions
    {0x00C0, 0x00D6},  // Latin-1 letters
    {0x00D8, 0x00F6},
    {0x00F8, 0x02C1},  // Latin Extended-A/B, IPA, modifier letters
    {0x0370, 0x0373},
    {0x0376, 0x0377},
    {0x037B, 0x037D},
    {0x0386, 0x0386},
    {0x0388, 0x038A},
    {0x038C, 0x038C},
    {0x038E, 0x03A1},
    {0x03A3, 0x0481},  // Greek, Coptic, Cyrillic
    {0x048A, 0x052F},  // Cyrillic supplement ranges
    {0x0531, 0x0556},  // Armenian capitals
    {0x0561, 0x0587},  // Armenian small
    {0x05D0, 0x05EA},  // Hebrew
    {0x0620, 0x064A},  // Arabic letters
    {0x0660, 0x0669},  // Arabic-Indic digits
    {0x066E, 0x066F},
    {0x0671, 0x06D3},
    {0x06F0, 0x06F9},  // Extended Arabic-Indic digits
    {0x0904, 0x0939},  // Devanagari letters
    {0x0958, 0x0961},
    {0x0966, 0x096F},  // Devanagari digits
    {0x0985, 0x098C},  // Bengali (letter blocks)
    {0x098F, 0x0990},
    {0x0993, 0x09A8},
    {0x09AA, 0x09B0},
    {0x09B6, 0x09B9},
    {0x09E6, 0x09EF},  // Bengali digits
    {0x0E01, 0x0E2E},  // Thai consonants
    {0x10A0, 0x10C5},  // Georgian capitals
    {0x10D0, 0x10FA},  // Georgian letters
    {0x1E00, 0x1F15},  // Latin Extended Additional, Greek Extended (partial)
    {0x1F18, 0x1F1D},
    {0x1F20, 0x1F45},
    {0x1F48, 0x1F4D},
    {0x1F50, 0x1F57},
    {0x3041, 0x3096},  // Hiragana
    {0x30A1, 0x30FA},  // Katakana
    {0x3105, 0x312D},  // Bopomofo
    {0x3400, 0x4DBF},  // CJK Extension A
    {0x4E00, 0x9FFF},  // CJK Unified
    {0xA000, 0xA48C},  // Yi
    {0xAC00, 0xD7A3},  // Hangul syllables
    {0xF900, 0xFA6D},  // CJK compatibility
    {0xFF10, 0xFF19},  // fullwidth digits
    {0xFF21, 0xFF3A},  // fullwidth A-Z
    {0xFF41, 0xFF5A},  // fullwidth a-z
    {0x10000, 0x1000B},
    {0x20000, 0x2A6DF},  // CJK Extension B
};

// Decodes one UTF-8 codepoint starting at position i. Returns the codepoint
// and advances i; invalid sequences consume one byte and yield U+FFFD.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
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
    if (i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong encodings and surrogates.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        ++i;
        return 0xFFFD;
    }
    i += len;
    return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace

bool is_word_codepoint(char32_t cp) {
    auto it = std::upper_bound(std::begin(kWordRanges), std::end(kWordRanges), cp,
                               [](char32_t v, const CpRange& r) { return v < r.lo; });
    if (it == std::begin(kWordRanges)) return false;
    --it;
    return cp >= it->lo && cp <= it->hi;
}

char32_t lower_codepoint(char32_t cp) {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
    // Latin-1
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    // Latin Extended-A: alternating pairs with three layouts
    if ((cp >= 0x0100 && cp <= 0x0137) || (cp >= 0x014A && cp <= 0x0177))
        return cp | 1;
    if ((cp >= 0x0139 && cp <= 0x0148) || (cp >= 0x0179 && cp <= 0x017E))
        return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x0178) return 0x00FF;  // Y with diaeresis
    // Greek
    if (cp == 0x0386) return 0x03AC;
    if (cp >= 0x0388 && cp <= 0x038A) return cp + 0x25;
    if (cp == 0x038C) return 0x03CC;
    if (cp == 0x038E || cp == 0x038F) return cp + 0x3F;
    if (cp >= 0x0391 && cp <= 0x03A1) return cp + 0x20;
    if (cp >= 0x03A3 && cp <= 0x03AB) return cp + 0x20;
    // Cyrillic
    if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
    if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
    if (cp == 0x04C0) return 0x04CF;  // palochka
    if (cp >= 0x04C1 && cp <= 0x04CE)  // zhe-breve block pairs odd-capital
        return (cp % 2 == 1) ? cp + 1 : cp;
    if ((cp >= 0x0460 && cp <= 0x0481) || (cp >= 0x048A && cp <= 0x052F))
        return cp | 1;
    // Armenian
    if (cp >= 0x0531 && cp <= 0x0556) return cp + 0x30;
    // Fullwidth Latin
    if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 0x20;
    return cp;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = decode_utf8(text, i);
        if (is_word_codepoint(cp)) {
            encode_utf8(lower_codepoint(cp), current);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string fold_case(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = decode_utf8(text, i);
        encode_utf8(lower_codepoint(cp), out);
    }
    return out;
}

}  // namespace storyline
