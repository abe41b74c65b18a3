#include "doctest.h"

#include <set>

#include "helpers/fixtures.hpp"

#include "chartfc/chart.hpp"
#include "chartfc/errors.hpp"
#include "chartfc/image.hpp"

using namespace chartfc;
using testutil::athlete_spec;

TEST_CASE("there are exactly 24 distinct styles") {
  const auto styles = enumerate_styles();
  CHECK(styles.size() == 24);
  std::set<std::string> seen;
  for (const ChartStyle& s : styles)
    seen.insert(to_string(s.orientation) + "/" + to_string(s.bar_color) + "/" +
                to_string(s.grid) + "/" + to_string(s.background));
  CHECK(seen.size() == 24);
}

TEST_CASE("style_for is a pure function of id and seed") {
  CHECK(style_for("c1", 7) == style_for("c1", 7));
  bool any_differs = false;
  for (int i = 0; i < 50 && !any_differs; ++i) {
    const std::string id = "c" + std::to_string(i);
    if (!(style_for(id, 7) == style_for(id, 8))) any_differs = true;
  }
  CHECK(any_differs);
}

TEST_CASE("style_for covers all 24 styles over many ids") {
  std::set<std::string> seen;
  for (int i = 0; i < 600; ++i) {
    const ChartStyle s = style_for("sample" + std::to_string(i), 3);
    seen.insert(to_string(s.orientation) + "/" + to_string(s.bar_color) + "/" +
                to_string(s.grid) + "/" + to_string(s.background));
  }
  CHECK(seen.size() == 24);
}

TEST_CASE("layout keeps every region and bar inside the canvas") {
  for (Orientation o : {Orientation::Horizontal, Orientation::Vertical}) {
    const ChartSpec spec = athlete_spec(o, 5);
    const Layout layout = plan_layout(spec);
    for (const LayoutRegion& r : layout.regions) {
      CHECK(r.x >= 0);
      CHECK(r.y >= 0);
      CHECK(r.x + r.w <= spec.canvas_w);
      CHECK(r.y + r.h <= spec.canvas_h);
      CHECK(r.w > 0);
      CHECK(r.h > 0);
    }
    REQUIRE(layout.bars.size() == 5);
    for (const BarRect& b : layout.bars) {
      CHECK(b.x >= layout.plot_x0);
      CHECK(b.y >= layout.plot_y0);
      CHECK(b.x + b.w <= layout.plot_x1);
      CHECK(b.y + b.h <= layout.plot_y1);
    }
  }
}

TEST_CASE("bars do not overlap along the category axis") {
  for (Orientation o : {Orientation::Horizontal, Orientation::Vertical}) {
    const Layout layout = plan_layout(athlete_spec(o, 6));
    for (size_t i = 0; i < layout.bars.size(); ++i)
      for (size_t j = i + 1; j < layout.bars.size(); ++j) {
        const BarRect& a = layout.bars[i];
        const BarRect& b = layout.bars[j];
        const bool disjoint = a.x + a.w <= b.x || b.x + b.w <= a.x ||
                              a.y + a.h <= b.y || b.y + b.h <= a.y;
        CHECK(disjoint);
      }
  }
}

TEST_CASE("layout carries one role label per axis and one category per bar") {
  const Layout layout = plan_layout(athlete_spec(Orientation::Horizontal, 4));
  int title_x = 0, title_y = 0;
  std::set<int> category_bars;
  for (const LayoutRegion& r : layout.regions) {
    if (r.role == RegionRole::AxisTitleX) ++title_x;
    if (r.role == RegionRole::AxisTitleY) ++title_y;
    if (r.role == RegionRole::TickCategory) {
      REQUIRE(r.bar_index.has_value());
      category_bars.insert(*r.bar_index);
    }
  }
  CHECK(title_x == 1);
  CHECK(title_y == 1);
  CHECK(category_bars == std::set<int>{0, 1, 2, 3});
}

TEST_CASE("bar length is proportional to the value") {
  const Layout layout = plan_layout(athlete_spec(Orientation::Horizontal, 4));
  // values are 1,2,3,4; horizontal bars grow along x
  for (size_t i = 0; i + 1 < layout.bars.size(); ++i) {
    CHECK(layout.bars[i].w * (i + 2.0) == doctest::Approx(layout.bars[i + 1].w * (i + 1.0)).epsilon(0.05));
  }
}

TEST_CASE("render produces a ppm of the configured canvas size") {
  const ChartSpec spec = athlete_spec(Orientation::Vertical, 3);
  const ChartArtifact art = render(spec);
  const Image img = Image::decode_ppm(art.image);
  CHECK(img.width() == spec.canvas_w);
  CHECK(img.height() == spec.canvas_h);
  CHECK(render(spec).image == art.image);  // same spec, same bytes
}

TEST_CASE("different styles draw different pixels") {
  ChartSpec a = athlete_spec(Orientation::Horizontal, 3);
  ChartSpec b = a;
  b.style.bar_color = BarColor::Blue;
  a.style.bar_color = BarColor::Green;
  CHECK(render(a).image != render(b).image);
}

TEST_CASE("sidecar json round trips the spec and the regions") {
  const ChartArtifact art = render(athlete_spec(Orientation::Horizontal, 3));
  const std::string text = sidecar_to_json(art.spec, art.layout.regions);
  const Sidecar sc = sidecar_from_json(text);
  CHECK(sc.spec.style == art.spec.style);
  CHECK(sc.spec.canvas_w == art.spec.canvas_w);
  CHECK(sc.spec.subtable.category_header == "athlete");
  CHECK(sc.spec.subtable.value_header == "rank");
  REQUIRE(sc.regions.size() == art.layout.regions.size());
  for (size_t i = 0; i < sc.regions.size(); ++i) CHECK(sc.regions[i] == art.layout.regions[i]);
  CHECK(sidecar_to_json(sc.spec, sc.regions) == text);
}

TEST_CASE("malformed sidecar json is an input error") {
  CHECK_THROWS_AS(sidecar_from_json("{"), InputError);
  CHECK_THROWS_AS(sidecar_from_json("{\"schema_version\":1}"), InputError);
}

TEST_CASE("sort_reading_order goes top to bottom then left to right") {
  std::vector<LayoutRegion> regions;
  auto add = [&](const std::string& text, int x, int y) {
    LayoutRegion r;
    r.text = text;
    r.x = x;
    r.y = y;
    r.w = 20;
    r.h = 10;
    regions.push_back(r);
  };
  add("d", 10, 100);
  add("b", 200, 2);  // same visual row as "a" despite slightly lower y
  add("a", 10, 0);
  add("c", 300, 1);
  sort_reading_order(regions);
  CHECK(regions[0].text == "a");
  CHECK(regions[1].text == "b");
  CHECK(regions[2].text == "c");
  CHECK(regions[3].text == "d");
}

TEST_CASE("a canvas too small for the labels overflows") {
  ChartSpec spec = athlete_spec(Orientation::Horizontal, 6);
  spec.canvas_w = 80;
  spec.canvas_h = 60;
  CHECK_THROWS_AS(plan_layout(spec), LayoutOverflow);
}

TEST_CASE("twenty rows still fit the default canvas") {
  ChartSpec spec = athlete_spec(Orientation::Horizontal, 2);
  spec.subtable.rows.clear();
  for (int i = 0; i < 20; ++i) {
    SubTableRow row;
    row.category = "r" + std::to_string(i);
    row.value = i + 1;
    row.value_text = std::to_string(i + 1);
    spec.subtable.rows.push_back(row);
  }
  const Layout layout = plan_layout(spec);
  CHECK(layout.bars.size() == 20);
}
