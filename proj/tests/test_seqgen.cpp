#include "doctest.h"

#include "helpers/fixtures.hpp"

#include "chartfc/chart.hpp"
#include "chartfc/errors.hpp"
#include "chartfc/image.hpp"
#include "chartfc/reader.hpp"
#include "chartfc/seqgen.hpp"

using namespace chartfc;
using testutil::athlete_spec;
using testutil::TempDir;

namespace {

ReadOutput fixture_read(Orientation o, int rows = 2) {
  const ChartArtifact art = render(athlete_spec(o, rows));
  ReadOutput out;
  out.canvas_w = art.spec.canvas_w;
  out.canvas_h = art.spec.canvas_h;
  for (const auto& r : art.layout.regions)
    out.regions.push_back({r.text, r.x, r.y, r.w, r.h});
  sort_reading_order(out.regions);
  return out;
}

}  // namespace

TEST_CASE("template names round trip") {
  for (TemplateKind t : {TemplateKind::Concat, TemplateKind::Tmp1, TemplateKind::Tmp2,
                         TemplateKind::Tmp3})
    CHECK(template_from_string(to_string(t)) == t);
  CHECK_THROWS_AS(template_from_string("tmp4"), InputError);
}

TEST_CASE("the two athlete chart serializes to the exact template strings") {
  const ReadOutput read = fixture_read(Orientation::Horizontal);

  CHECK(seq_template(read, TemplateKind::Tmp1).text() ==
        "entry one: athlete is usain bolt ; rank is 1 ; "
        "entry two: athlete is andy stanfield ; rank is 2");
  CHECK(seq_template(read, TemplateKind::Tmp2).text() ==
        "row 0: athlete is usain bolt ; rank is 1 ; "
        "row 1: athlete is andy stanfield ; rank is 2");
  CHECK(seq_template(read, TemplateKind::Tmp3).text() ==
        "athlete is usain bolt when rank is 1 ; "
        "athlete is andy stanfield when rank is 2");
  CHECK(seq_concat(read).text().rfind("usain bolt ; 1 ; andy stanfield ; 2", 0) == 0);
}

TEST_CASE("templates read the same on vertical charts") {
  const ReadOutput read = fixture_read(Orientation::Vertical);
  CHECK(seq_template(read, TemplateKind::Tmp1).text() ==
        "entry one: athlete is usain bolt ; rank is 1 ; "
        "entry two: athlete is andy stanfield ; rank is 2");
}

TEST_CASE("concat keeps every region once with scaffold separators") {
  const ReadOutput read = fixture_read(Orientation::Horizontal, 3);
  const SequenceResult seq = seq_concat(read);
  REQUIRE(seq.tokens.size() == seq.alignment.size());
  std::vector<bool> seen(read.regions.size(), false);
  for (size_t i = 0; i < seq.tokens.size(); ++i) {
    const int origin = seq.alignment[i];
    if (origin == kScaffoldOrigin) {
      CHECK(seq.tokens[i] == ";");
    } else {
      REQUIRE(origin >= 0);
      REQUIRE(origin < static_cast<int>(read.regions.size()));
      seen[origin] = true;
    }
  }
  for (bool s : seen) CHECK(s);
}

TEST_CASE("template alignment points at real regions") {
  const ReadOutput read = fixture_read(Orientation::Horizontal, 2);
  const SequenceResult seq = seq_template(read, TemplateKind::Tmp1);
  REQUIRE(seq.tokens.size() == seq.alignment.size());
  for (size_t i = 0; i < seq.tokens.size(); ++i) {
    const int origin = seq.alignment[i];
    if (origin == kScaffoldOrigin) continue;
    REQUIRE(origin >= 0);
    REQUIRE(origin < static_cast<int>(read.regions.size()));
    // every aligned token is a word of its source region
    CHECK(read.regions[origin].text.find(seq.tokens[i]) != std::string::npos);
  }
}

TEST_CASE("pair_records recovers every subtable cell verbatim") {
  for (Orientation o : {Orientation::Horizontal, Orientation::Vertical}) {
    const SubTable st = testutil::athlete_subtable(4);
    const ReadOutput read = fixture_read(o, 4);
    const auto records = pair_records(read);
    REQUIRE(records.size() == st.rows.size());
    for (size_t i = 0; i < records.size(); ++i) {
      CHECK(records[i].num == static_cast<int>(i) + 1);
      CHECK(records[i].category_text == st.rows[i].category);
      CHECK(records[i].value_text == st.rows[i].value_text);
    }
  }
}

TEST_CASE("an empty read output cannot be serialized") {
  ReadOutput empty;
  empty.canvas_w = 640;
  empty.canvas_h = 480;
  CHECK_THROWS_AS(seq_concat(empty), EmptyReadOutput);
  CHECK_THROWS_AS(seq_template(empty, TemplateKind::Tmp1), EmptyReadOutput);
}

TEST_CASE("templates need both axis titles") {
  const ReadOutput read = fixture_read(Orientation::Horizontal);
  ClassifyResult cls = classify_roles(read);
  for (auto& r : cls.regions)
    if (r.role == RegionRole::AxisTitleX) r.region.text = "";
  CHECK_THROWS_AS(seq_template(cls, TemplateKind::Tmp1), MissingAxisTitle);
}

TEST_CASE("seq_template refuses the concat kind") {
  const ReadOutput read = fixture_read(Orientation::Horizontal);
  CHECK_THROWS_AS(seq_template(read, TemplateKind::Concat), InputError);
}
