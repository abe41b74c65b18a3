#include "doctest.h"

#include "helpers/fixtures.hpp"

#include "chartfc/chart.hpp"
#include "chartfc/errors.hpp"
#include "chartfc/image.hpp"
#include "chartfc/reader.hpp"

using namespace chartfc;
using testutil::athlete_spec;
using testutil::TempDir;

namespace {

// Renders the fixture and stores its sidecar, returning both paths.
struct StoredChart {
  TempDir dir;
  std::string image_path;
  std::string sidecar_path;
  ChartArtifact art;

  explicit StoredChart(Orientation o, int rows = 3)
      : dir("reader"), art(render(athlete_spec(o, rows))) {
    image_path = dir.sub("chart.ppm");
    sidecar_path = dir.sub("chart.json");
    write_file_bytes(image_path, art.image);
    write_file_text(sidecar_path, sidecar_to_json(art.spec, art.layout.regions));
  }
};

}  // namespace

TEST_CASE("oracle read returns the sidecar regions in reading order") {
  const StoredChart chart(Orientation::Horizontal);
  const ReadOutput out = read_oracle(chart.sidecar_path);
  CHECK(out.canvas_w == 640);
  CHECK(out.canvas_h == 480);
  REQUIRE(out.regions.size() == chart.art.layout.regions.size());
  for (size_t i = 0; i < out.regions.size(); ++i) {
    CHECK(out.regions[i].text == chart.art.layout.regions[i].text);
    CHECK(out.regions[i].x == chart.art.layout.regions[i].x);
    CHECK(out.regions[i].y == chart.art.layout.regions[i].y);
  }
  CHECK_THROWS_AS(read_oracle(chart.dir.sub("missing.json")), MissingSidecar);
}

TEST_CASE("zero noise perturbation is the identity") {
  const StoredChart chart(Orientation::Vertical);
  const ReadOutput out = read_oracle(chart.sidecar_path);
  CHECK(perturb(out, NoiseConfig{}, 123) == out);
}

TEST_CASE("perturbation is deterministic in the seed") {
  const StoredChart chart(Orientation::Horizontal);
  const ReadOutput out = read_oracle(chart.sidecar_path);
  NoiseConfig noise;
  noise.p_drop = 0.2;
  noise.p_sub = 0.3;
  noise.jitter_px = 4;
  CHECK(perturb(out, noise, 9) == perturb(out, noise, 9));
  CHECK(perturb(out, noise, 9) != perturb(out, noise, 10));
}

TEST_CASE("p_drop 1 removes every region") {
  const StoredChart chart(Orientation::Horizontal);
  const ReadOutput out = read_oracle(chart.sidecar_path);
  NoiseConfig noise;
  noise.p_drop = 1.0;
  CHECK(perturb(out, noise, 1).regions.empty());
}

TEST_CASE("classified roles match the layout annotations exactly") {
  for (Orientation o : {Orientation::Horizontal, Orientation::Vertical}) {
    const StoredChart chart(o, 4);
    const ReadOutput out = read_oracle(chart.sidecar_path);
    const ClassifyResult cls = classify_roles(out);
    CHECK(cls.orientation == o);
    REQUIRE(cls.regions.size() == chart.art.layout.regions.size());
    for (size_t i = 0; i < cls.regions.size(); ++i)
      CHECK(cls.regions[i].role == chart.art.layout.regions[i].role);
  }
}

TEST_CASE("classification only depends on relative geometry") {
  const StoredChart chart(Orientation::Horizontal, 3);
  ReadOutput out = read_oracle(chart.sidecar_path);
  const ClassifyResult before = classify_roles(out);
  for (TextRegion& r : out.regions) {
    r.x += 17;
    r.y += 9;
  }
  out.canvas_w += 17;
  out.canvas_h += 9;
  const ClassifyResult after = classify_roles(out);
  REQUIRE(after.regions.size() == before.regions.size());
  for (size_t i = 0; i < after.regions.size(); ++i) {
    CHECK(after.regions[i].role == before.regions[i].role);
    CHECK(after.regions[i].bar_index == before.regions[i].bar_index);
  }
}

TEST_CASE("too few regions are unclassifiable") {
  ReadOutput out;
  out.canvas_w = 640;
  out.canvas_h = 480;
  out.regions = {{"a", 1, 1, 10, 10}, {"b", 1, 30, 10, 10}};
  CHECK_THROWS_AS(classify_roles(out), Unclassifiable);
}

TEST_CASE("the exec ocr adapter reproduces the oracle read") {
  const StoredChart chart(Orientation::Horizontal);
  const std::string endpoint =
      std::string("exec:") + OCR_STUB_PATH + " " + chart.sidecar_path;
  const ReadOutput ocr = read_ocr_file(chart.image_path, endpoint);
  const ReadOutput oracle = read_oracle(chart.sidecar_path);
  CHECK(ocr == oracle);
}

TEST_CASE("adapter replies for a different request are refused") {
  const StoredChart chart(Orientation::Horizontal);
  const std::string endpoint =
      std::string("exec:") + OCR_STUB_PATH + " " + chart.sidecar_path + " --wrong-id";
  CHECK_THROWS_AS(read_ocr_file(chart.image_path, endpoint), MalformedAdapterReply);
}

TEST_CASE("non json adapter replies are refused") {
  const StoredChart chart(Orientation::Horizontal);
  const std::string endpoint =
      std::string("exec:") + OCR_STUB_PATH + " " + chart.sidecar_path + " --garbage";
  CHECK_THROWS_AS(read_ocr_file(chart.image_path, endpoint), MalformedAdapterReply);
}

TEST_CASE("a failing adapter command is unreachable") {
  const StoredChart chart(Orientation::Horizontal);
  const std::string endpoint =
      std::string("exec:") + OCR_STUB_PATH + " " + chart.sidecar_path + " --fail";
  CHECK_THROWS_AS(read_ocr_file(chart.image_path, endpoint), AdapterUnreachable);
}

TEST_CASE("unsupported endpoint schemes are input errors") {
  const StoredChart chart(Orientation::Horizontal);
  CHECK_THROWS_AS(read_ocr_file(chart.image_path, "ftp://nowhere"), InputError);
}
