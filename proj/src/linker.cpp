#include "chartfc/linker.hpp"

#include <algorithm>
#include <set>

namespace chartfc {

namespace {

std::string join_lemmas(const std::vector<std::string>& lemmas, size_t start, size_t n) {
    std::string out;
    for (size_t k = 0; k < n; ++k) {
        if (k) out.push_back(' ');
        out += lemmas[start + k];
    }
    return out;
}

std::string full_lemma(const std::string& text) {
    TokenizedText t = tokenize_lemmatize(text);
    return join_lemmas(t.lemmas, 0, t.lemmas.size());
}

std::string join_tokens(const std::vector<std::string>& tokens, size_t start, size_t n) {
    std::string out;
    for (size_t k = 0; k < n; ++k) {
        if (k) out.push_back(' ');
        out += tokens[start + k];
    }
    return out;
}

}  // namespace

size_t resolve_ambiguous(const std::string& token,
                         const std::vector<std::string>& candidate_headers) {
    if (candidate_headers.size() < 2)
        throw InputError("resolve_ambiguous: need at least 2 candidates");
    size_t best = 0;
    int best_dist = levenshtein(token, candidate_headers[0]);
    for (size_t i = 1; i < candidate_headers.size(); ++i) {
        int d = levenshtein(token, candidate_headers[i]);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

std::vector<LinkResult> link_claim(const TokenizedText& claim, const Table& table) {
    const size_t ncols = table.headers.size();
    std::vector<std::string> header_lemmas(ncols);
    for (size_t c = 0; c < ncols; ++c) header_lemmas[c] = full_lemma(table.headers[c]);

    // cell lemma sets per column
    std::vector<std::set<std::string>> cell_lemmas(ncols);
    for (const auto& row : table.rows)
        for (size_t c = 0; c < ncols; ++c) {
            if (row.size() != ncols) throw InputError("link_claim: table not rectangular");
            cell_lemmas[c].insert(full_lemma(row[c]));
        }

    std::vector<LinkResult> results;
    size_t i = 0;
    const size_t ntok = claim.tokens.size();
    while (i < ntok) {
        bool matched = false;
        for (size_t n = std::min<size_t>(3, ntok - i); n >= 1 && !matched; --n) {
            std::string gram = join_lemmas(claim.lemmas, i, n);
            if (gram.empty()) continue;

            std::vector<size_t> header_hits, cell_hits;
            for (size_t c = 0; c < ncols; ++c) {
                if (header_lemmas[c] == gram) header_hits.push_back(c);
                else if (cell_lemmas[c].count(gram)) cell_hits.push_back(c);
            }

            const bool is_header = !header_hits.empty();
            const auto& hits = is_header ? header_hits : cell_hits;
            if (hits.empty()) continue;

            size_t col;
            if (hits.size() == 1) {
                col = hits[0];
            } else {
                std::vector<std::string> cands;
                for (size_t c : hits) cands.push_back(table.headers[c]);
                col = hits[resolve_ambiguous(join_tokens(claim.tokens, i, n), cands)];
            }
            results.push_back({i, col,
                               is_header ? MatchKind::HeaderMatch : MatchKind::CellMatch});
            i += n;
            matched = true;
        }
        if (!matched) ++i;
    }
    return results;
}

SubTable extract_subtable(const Table& table, const std::vector<LinkResult>& links) {
    table.validate();

    std::set<size_t> columns;
    for (const auto& l : links) columns.insert(l.column_index);
    if (columns.size() > 2)
        throw RejectedTooManyColumns("links hit " + std::to_string(columns.size()) +
                                     " columns");
    if (columns.size() < 2)
        throw RejectedUnderlinked("links hit " + std::to_string(columns.size()) +
                                  " column(s), need 2");
    if (table.rows.size() > 20)
        throw RejectedTooManyRows("table has " + std::to_string(table.rows.size()) +
                                  " rows, maximum is 20");
    if (table.rows.empty())
        throw RejectedTooManyRows("table has 0 rows, need at least 1");

    auto it = columns.begin();
    size_t col_a = *it++;
    size_t col_b = *it;

    auto fully_numeric = [&](size_t c) {
        for (const auto& row : table.rows)
            if (!parse_decimal(row[c])) return false;
        return true;
    };
    bool a_num = fully_numeric(col_a);
    bool b_num = fully_numeric(col_b);
    if (!a_num && !b_num)
        throw RejectedNonNumeric("neither linked column is fully numeric");

    // Exactly one numeric column becomes the value column; when both are
    // numeric the lower-index column keeps the category role.
    size_t value_col = b_num ? col_b : col_a;
    size_t cat_col = b_num ? col_a : col_b;

    SubTable out;
    out.category_header = table.headers[cat_col];
    out.value_header = table.headers[value_col];
    for (const auto& row : table.rows) {
        if (row[cat_col].empty())
            throw RejectedNonNumeric("empty category cell in column " +
                                     table.headers[cat_col]);
        double v = *parse_decimal(row[value_col]);
        out.rows.push_back({row[cat_col], v, format_decimal(v)});
    }
    return out;
}

}  // namespace chartfc
