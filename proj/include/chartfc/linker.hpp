#pragma once
// Claim-to-table linking: match claim tokens against column headers and
// cells, resolve multi-column ambiguity by Levenshtein distance, and
// extract the two-column sub-table a chart is drawn from.

#include <cstddef>
#include <string>
#include <vector>

#include "chartfc/core.hpp"
#include "chartfc/text.hpp"

namespace chartfc {

enum class MatchKind { HeaderMatch, CellMatch };

struct LinkResult {
    size_t token_index;   // start of the matching claim token / n-gram
    size_t column_index;  // table column
    MatchKind match_kind;

    bool operator==(const LinkResult&) const = default;
};

struct SubTableRow {
    std::string category;
    double value = 0.0;
    std::string value_text;  // canonical decimal form of value
};

struct SubTable {
    std::string category_header;
    std::string value_header;
    std::vector<SubTableRow> rows;  // 1..20 rows
};

// Exact lemma matches of claim n-grams (length up to 3) against header or
// cell lemma sequences. Results ordered by token_index; a matched n-gram is
// consumed so links never overlap. Ambiguous matches (several columns) are
// resolved through resolve_ambiguous.
std::vector<LinkResult> link_claim(const TokenizedText& claim, const Table& table);

// Index into candidate_headers minimizing levenshtein(token, header); ties
// break to the lowest index. Requires >= 2 candidates.
size_t resolve_ambiguous(const std::string& token,
                         const std::vector<std::string>& candidate_headers);

// Keeps exactly the two linked columns (one categorical, one numeric) and
// all table rows. Throws a Rejected subclass when the claim/table pair is
// not chartable; never returns a partially valid sub-table.
SubTable extract_subtable(const Table& table, const std::vector<LinkResult>& links);

}  // namespace chartfc
