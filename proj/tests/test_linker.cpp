#include "doctest.h"

#include "chartfc/errors.hpp"
#include "chartfc/linker.hpp"
#include "chartfc/text.hpp"

using namespace chartfc;

namespace {

Table athlete_table() {
  Table t;
  t.id = "t1";
  t.headers = {"athlete", "rank", "nation"};
  t.rows = {{"usain bolt", "1", "jamaica"},
            {"andy stanfield", "2", "usa"},
            {"carl lewis", "3", "usa"}};
  return t;
}

}  // namespace

TEST_CASE("claim tokens link to cells and headers through lemmas") {
  const Table t = athlete_table();
  const auto links = link_claim(tokenize_lemmatize("usain bolt is ranked 1"), t);
  REQUIRE(links.size() == 3);
  CHECK(links[0] == LinkResult{0, 0, MatchKind::CellMatch});    // "usain bolt"
  CHECK(links[1] == LinkResult{3, 1, MatchKind::HeaderMatch});  // "ranked" ~ rank
  CHECK(links[2] == LinkResult{4, 1, MatchKind::CellMatch});    // "1"
}

TEST_CASE("multi word cells match as one n-gram") {
  const Table t = athlete_table();
  const auto links = link_claim(tokenize_lemmatize("andy stanfield beat carl lewis"), t);
  REQUIRE(links.size() == 2);
  CHECK(links[0].token_index == 0);
  CHECK(links[1].token_index == 3);
  for (const auto& l : links) CHECK(l.column_index == 0);
}

TEST_CASE("header matches win over cell matches for the same gram") {
  Table t;
  t.id = "t";
  t.headers = {"city", "rank"};
  t.rows = {{"rank", "1"}};  // a cell that spells a header name
  const auto links = link_claim(tokenize_lemmatize("the rank column"), t);
  REQUIRE(links.size() == 1);
  CHECK(links[0].match_kind == MatchKind::HeaderMatch);
  CHECK(links[0].column_index == 1);
}

TEST_CASE("resolve_ambiguous picks the closest header by edit distance") {
  CHECK(resolve_ambiguous("rank", {"ranking", "rink", "population"}) == 1);
  CHECK(resolve_ambiguous("population", {"rank", "population"}) == 1);
  CHECK_THROWS_AS(resolve_ambiguous("x", {"only"}), InputError);
}

TEST_CASE("extract_subtable keeps the linked category and value columns") {
  const Table t = athlete_table();
  const auto links = link_claim(tokenize_lemmatize("usain bolt is ranked 1"), t);
  const SubTable st = extract_subtable(t, links);
  CHECK(st.category_header == "athlete");
  CHECK(st.value_header == "rank");
  REQUIRE(st.rows.size() == 3);
  CHECK(st.rows[0].category == "usain bolt");
  CHECK(st.rows[0].value == 1.0);
  CHECK(st.rows[0].value_text == "1");
  CHECK(st.rows[2].category == "carl lewis");
  CHECK(st.rows[2].value == 3.0);
}

TEST_CASE("linking a single column is rejected as underlinked") {
  const Table t = athlete_table();
  const auto links = link_claim(tokenize_lemmatize("usain bolt and carl lewis"), t);
  CHECK_THROWS_AS(extract_subtable(t, links), RejectedUnderlinked);
}

TEST_CASE("linking three columns is rejected") {
  const Table t = athlete_table();
  const auto links =
      link_claim(tokenize_lemmatize("usain bolt of jamaica is ranked 1"), t);
  CHECK_THROWS_AS(extract_subtable(t, links), RejectedTooManyColumns);
}

TEST_CASE("a text-only column pair is rejected as non numeric") {
  const Table t = athlete_table();
  const auto links = link_claim(tokenize_lemmatize("usain bolt is from jamaica"), t);
  CHECK_THROWS_AS(extract_subtable(t, links), RejectedNonNumeric);
}

TEST_CASE("more than twenty rows are rejected") {
  Table t;
  t.id = "big";
  t.headers = {"name", "score"};
  for (int i = 0; i < 21; ++i)
    t.rows.push_back({"player" + std::to_string(i), std::to_string(i)});
  const auto links = link_claim(tokenize_lemmatize("player1 has score 1"), t);
  CHECK_THROWS_AS(extract_subtable(t, links), RejectedTooManyRows);
}

TEST_CASE("two numeric columns keep the lower index as category") {
  Table t;
  t.id = "nums";
  t.headers = {"year", "medals"};
  t.rows = {{"2004", "3"}, {"2008", "5"}};
  const auto links = link_claim(tokenize_lemmatize("in 2008 the medals were 5"), t);
  const SubTable st = extract_subtable(t, links);
  CHECK(st.category_header == "year");
  CHECK(st.value_header == "medals");
}
