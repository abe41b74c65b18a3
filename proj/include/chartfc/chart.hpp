#pragma once
// Deterministic bar chart renderer. Layout is computed in integer pixel
// space from fixed font metrics, so the same spec yields byte-identical
// rasters and text regions on every platform.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chartfc/image.hpp"
#include "chartfc/linker.hpp"

namespace chartfc {

// Gap between a bar and its value annotation, and between labels and the
// plot edge. Readers use it to recover a bar's pixel extent from its
// annotation box.
inline constexpr int kChartPad = 6;

enum class Orientation { Horizontal, Vertical };
enum class BarColor { Green, Blue, Pink };
enum class GridMode { None, White };
enum class Background { White, Gray };

std::string to_string(Orientation o);
std::string to_string(BarColor c);
std::string to_string(GridMode g);
std::string to_string(Background b);
Orientation orientation_from_string(const std::string& s);
BarColor bar_color_from_string(const std::string& s);
GridMode grid_from_string(const std::string& s);
Background background_from_string(const std::string& s);

struct ChartStyle {
  Orientation orientation = Orientation::Horizontal;
  BarColor bar_color = BarColor::Green;
  GridMode grid = GridMode::None;
  Background background = Background::White;

  bool operator==(const ChartStyle&) const = default;
};

// All 24 orientation/color/grid/background combinations in a fixed order.
std::vector<ChartStyle> enumerate_styles();

// Deterministic style pick for a sample id under a given seed.
ChartStyle style_for(const std::string& sample_id, uint64_t style_seed);

struct ChartSpec {
  SubTable subtable;
  ChartStyle style;
  int canvas_w = 640;
  int canvas_h = 480;
};

enum class RegionRole { AxisTitleX, AxisTitleY, TickCategory, TickValue };

std::string to_string(RegionRole r);
RegionRole region_role_from_string(const std::string& s);

struct LayoutRegion {
  std::string text;
  RegionRole role = RegionRole::TickValue;
  int x = 0, y = 0, w = 0, h = 0;
  // Set for per-bar regions (the category label and the value annotation
  // of one bar); absent for axis titles and gridline labels.
  std::optional<int> bar_index;

  double x_center() const { return x + w / 2.0; }
  double y_center() const { return y + h / 2.0; }
  bool operator==(const LayoutRegion&) const = default;
};

struct BarRect {
  int x = 0, y = 0, w = 0, h = 0;
  bool operator==(const BarRect&) const = default;
};

struct Layout {
  std::vector<LayoutRegion> regions;  // in reading order, see sort_reading_order
  std::vector<BarRect> bars;          // bars[i] is subtable row i
  // Plot rectangle (the area bars live in), for debugging and grid drawing.
  int plot_x0 = 0, plot_y0 = 0, plot_x1 = 0, plot_y1 = 0;
  std::vector<double> tick_values;    // gridline positions on the value axis
};

// Text placement without rasterization. Throws LayoutOverflow when labels
// cannot fit the canvas without overlapping.
Layout plan_layout(const ChartSpec& spec);

struct ChartArtifact {
  ChartSpec spec;
  Layout layout;
  std::vector<uint8_t> image;  // PPM bytes
};

ChartArtifact render(const ChartSpec& spec);

// Orders regions as a human scans a chart: rows grouped by y-center
// within half the median region height, rows top to bottom, items left
// to right. Renderer output and reader output both use this order.
// Works for any box type with x/y/w/h/text and the center accessors.
template <typename R>
void sort_reading_order(std::vector<R>& regions) {
  if (regions.empty()) return;
  std::vector<int> heights;
  heights.reserve(regions.size());
  for (const auto& r : regions) heights.push_back(r.h);
  std::sort(heights.begin(), heights.end());
  double tol = heights[heights.size() / 2] / 2.0;

  std::stable_sort(regions.begin(), regions.end(), [](const R& a, const R& b) {
    if (a.y_center() != b.y_center()) return a.y_center() < b.y_center();
    if (a.x != b.x) return a.x < b.x;
    return a.text < b.text;
  });
  std::vector<std::vector<R>> rows;
  double anchor = 0;
  for (auto& r : regions) {
    if (rows.empty() || (r.y_center() - anchor) > tol) {
      rows.emplace_back();
      anchor = r.y_center();
    }
    rows.back().push_back(std::move(r));
  }
  regions.clear();
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(), [](const R& a, const R& b) {
      if (a.x != b.x) return a.x < b.x;
      if (a.y != b.y) return a.y < b.y;
      return a.text < b.text;
    });
    for (auto& r : row) regions.push_back(std::move(r));
  }
}

// Sidecar document: everything a reader needs to recover the chart text
// without touching pixels.
std::string sidecar_to_json(const ChartSpec& spec, const std::vector<LayoutRegion>& regions);
struct Sidecar {
  ChartSpec spec;
  std::vector<LayoutRegion> regions;
};
Sidecar sidecar_from_json(const std::string& json_text);

// Debug view of the layout as simple SVG rectangles; not a raster format.
std::string layout_to_svg(const ChartSpec& spec, const Layout& layout);

}  // namespace chartfc
