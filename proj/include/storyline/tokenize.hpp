#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace storyline {

// Splits UTF-8 text into case-folded word tokens: maximal runs of Unicode
// letters/digits; punctuation, symbols and whitespace are dropped. Invalid
// bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

// Case-folds a UTF-8 string codepoint-by-codepoint (simple one-to-one
// lowercase mapping; no locale).
std::string fold_case(std::string_view text);

// Classification/fold primitives, exposed for tests.
bool is_word_codepoint(char32_t cp);
char32_t lower_codepoint(char32_t cp);

}  // namespace storyline
