#pragma once
// Tokenization, rule-based lemmatization, edit distance, and the canonical
// decimal formatting shared by the linker and the renderer.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chartfc {

struct TokenizedText {
    std::vector<std::string> tokens;
    std::vector<std::string> lemmas;  // same length as tokens
};

// Lowercases and splits on punctuation. Alphabetic runs and decimal numbers
// (digits with an optional single interior point) become tokens; everything
// else separates. Lemmas come from the suffix rules in lemmatize().
TokenizedText tokenize_lemmatize(const std::string& text);

// Suffix-stripping lemmatizer over a lowercase token:
//   "ies" -> "y"                         (len >= 5)
//   "es" drop when preceded by s/x/z/h, else "s" drop   (len >= 4)
//   "ing" drop with doubled-consonant repair             (len >= 6)
//   "ed" drop with doubled-consonant repair              (len >= 5)
std::string lemmatize(const std::string& token);

// Classic edit distance, unit costs for insert/delete/substitute.
int levenshtein(const std::string& a, const std::string& b);

// Strict decimal grammar: [+-]? digits [ '.' digits ]. No exponents, no
// thousands separators. Returns nullopt when the whole string does not match.
std::optional<double> parse_decimal(const std::string& s);

// Shortest decimal representation that round-trips the value. This is the
// single formatter used for sub-table values, bar annotations, and ticks.
std::string format_decimal(double v);

}  // namespace chartfc
