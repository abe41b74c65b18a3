#include "chartfc/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace chartfc {

namespace {

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// "runn" -> "run"; leaves "fall"-style stems alone only when letters differ.
void repair_doubled_consonant(std::string& s) {
    size_t n = s.size();
    if (n >= 2 && s[n - 1] == s[n - 2] && !is_vowel(s[n - 1])) s.pop_back();
}

}  // namespace

std::string lemmatize(const std::string& token) {
    const std::string& t = token;
    size_t n = t.size();
    if (n >= 5 && t.compare(n - 3, 3, "ies") == 0) return t.substr(0, n - 3) + "y";
    if (n >= 4 && t.compare(n - 2, 2, "es") == 0) {
        char before = t[n - 3];
        if (before == 's' || before == 'x' || before == 'z' || before == 'h')
            return t.substr(0, n - 2);
        return t.substr(0, n - 1);
    }
    if (n >= 4 && t.back() == 's' && t[n - 2] != 's') return t.substr(0, n - 1);
    if (n >= 6 && t.compare(n - 3, 3, "ing") == 0) {
        std::string stem = t.substr(0, n - 3);
        repair_doubled_consonant(stem);
        return stem;
    }
    if (n >= 5 && t.compare(n - 2, 2, "ed") == 0) {
        std::string stem = t.substr(0, n - 2);
        repair_doubled_consonant(stem);
        return stem;
    }
    return t;
}

TokenizedText tokenize_lemmatize(const std::string& text) {
    TokenizedText out;
    size_t i = 0, n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isalpha(c)) {
            std::string tok;
            while (i < n && std::isalpha(static_cast<unsigned char>(text[i]))) {
                tok.push_back(
                    static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
                ++i;
            }
            out.tokens.push_back(tok);
            out.lemmas.push_back(lemmatize(tok));
        } else if (std::isdigit(c)) {
            std::string tok;
            while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) {
                tok.push_back(text[i]);
                ++i;
            }
            // one interior decimal point
            if (i + 1 < n && text[i] == '.' &&
                std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
                tok.push_back('.');
                ++i;
                while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) {
                    tok.push_back(text[i]);
                    ++i;
                }
            }
            out.tokens.push_back(tok);
            out.lemmas.push_back(tok);
        } else {
            ++i;
        }
    }
    return out;
}

int levenshtein(const std::string& a, const std::string& b) {
    size_t m = a.size(), n = b.size();
    std::vector<int> prev(n + 1), cur(n + 1);
    for (size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);
    for (size_t i = 1; i <= m; ++i) {
        cur[0] = static_cast<int>(i);
        for (size_t j = 1; j <= n; ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

std::optional<double> parse_decimal(const std::string& s) {
    if (s.empty()) return std::nullopt;
    size_t i = 0;
    if (s[0] == '+' || s[0] == '-') i = 1;
    size_t digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    if (digits == 0) return std::nullopt;
    if (i < s.size() && s[i] == '.') {
        ++i;
        size_t frac = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++frac;
        if (frac == 0) return std::nullopt;
    }
    if (i != s.size()) return std::nullopt;
    // from_chars never accepts an explicit '+', so start past it.
    const char* first = s.data() + (s[0] == '+' ? 1 : 0);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::string format_decimal(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    std::string s(buf, ptr);
    // to_chars may emit scientific notation for extreme magnitudes; chart
    // values stay in plain range, but keep the output well-formed anyway.
    return s;
}

}  // namespace chartfc
