#include "chartfc/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "json.hpp"

#include "chartfc/errors.hpp"
#include "chartfc/font.hpp"
#include "chartfc/rng.hpp"
#include "chartfc/text.hpp"

namespace chartfc {
namespace {

using nlohmann::json;

constexpr int kPad = kChartPad;
constexpr int kMaxTicks = 6;
constexpr int kTickLabelGap = 4;  // min pixel gap between neighboring tick labels

constexpr Rgb kInk{40, 40, 40};
constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kGrayBg{229, 229, 229};
constexpr Rgb kGreen{85, 168, 104};
constexpr Rgb kBlue{76, 114, 176};
constexpr Rgb kPink{221, 132, 190};

Rgb bar_rgb(BarColor c) {
  switch (c) {
    case BarColor::Green: return kGreen;
    case BarColor::Blue: return kBlue;
    default: return kPink;
  }
}

// Exact decimal string for mant * 10^e, so tick labels never carry
// binary round-off artifacts.
std::string format_scaled(long long mant, int e) {
  std::string digits = std::to_string(mant);
  if (e >= 0) {
    digits.append(static_cast<size_t>(e), '0');
    return digits;
  }
  size_t frac = static_cast<size_t>(-e);
  if (digits.size() <= frac)
    digits.insert(0, std::string(frac - digits.size() + 1, '0'));
  digits.insert(digits.size() - frac, ".");
  while (digits.back() == '0') digits.pop_back();
  if (digits.back() == '.') digits.pop_back();
  return digits;
}

struct TickSet {
  std::vector<double> values;
  std::vector<std::string> labels;
};

// Walks the 1/2/5 ladder from fine to coarse and returns the first step
// whose labels fit: at most kMaxTicks ticks spanning [0, vmax], and no
// two neighboring labels closer than kTickLabelGap along the value axis.
// axis_px is the pixel length of the value axis; label extent along the
// axis is the label width for horizontal charts, the font height for
// vertical ones.
TickSet choose_ticks(double vmax, int axis_px, bool horizontal) {
  int e0 = static_cast<int>(std::floor(std::log10(vmax))) - 2;
  for (int e = e0; e < e0 + 9; ++e) {
    for (int m : {1, 2, 5}) {
      double step = m * std::pow(10.0, e);
      int k = static_cast<int>(std::floor(vmax / step)) + 2;
      TickSet ticks;
      for (int i = 0; i <= k; ++i) {
        std::string label = format_scaled(static_cast<long long>(m) * i, e);
        double v = parse_decimal(label).value();
        if (v > vmax) break;
        ticks.values.push_back(v);
        ticks.labels.push_back(label);
      }
      if (ticks.values.size() < 2 || ticks.values.size() > kMaxTicks) continue;
      bool fits = true;
      double prev_pos = 0, prev_ext = 0;
      for (size_t i = 0; i < ticks.values.size(); ++i) {
        double pos = axis_px * (ticks.values[i] / vmax);
        double ext = horizontal ? text_width(ticks.labels[i]) : kFontHeight;
        if (i > 0 && pos - prev_pos < (ext + prev_ext) / 2 + kTickLabelGap) {
          fits = false;
          break;
        }
        prev_pos = pos;
        prev_ext = ext;
      }
      if (fits) return ticks;
    }
  }
  throw LayoutOverflow("no gridline step fits the value axis");
}

bool rects_overlap(int ax, int ay, int aw, int ah, int bx, int by, int bw, int bh) {
  return ax < bx + bw && bx < ax + aw && ay < by + bh && by < ay + ah;
}

void validate_layout(const ChartSpec& spec, const Layout& lay) {
  for (const auto& r : lay.regions) {
    if (r.x < 0 || r.y < 0 || r.x + r.w > spec.canvas_w || r.y + r.h > spec.canvas_h)
      throw LayoutOverflow("label \"" + r.text + "\" exceeds canvas");
  }
  for (size_t i = 0; i < lay.regions.size(); ++i) {
    const auto& a = lay.regions[i];
    for (size_t j = i + 1; j < lay.regions.size(); ++j) {
      const auto& b = lay.regions[j];
      if (rects_overlap(a.x, a.y, a.w, a.h, b.x, b.y, b.w, b.h))
        throw LayoutOverflow("labels \"" + a.text + "\" and \"" + b.text + "\" overlap");
    }
    for (const auto& bar : lay.bars) {
      if (rects_overlap(a.x, a.y, a.w, a.h, bar.x, bar.y, bar.w, bar.h))
        throw LayoutOverflow("label \"" + a.text + "\" overlaps a bar");
    }
  }
}

int bar_px(double value, double vmax, int plot_len) {
  return static_cast<int>(std::llround(plot_len * (value / vmax)));
}

}  // namespace

std::string to_string(Orientation o) {
  return o == Orientation::Horizontal ? "horizontal" : "vertical";
}
std::string to_string(BarColor c) {
  switch (c) {
    case BarColor::Green: return "green";
    case BarColor::Blue: return "blue";
    default: return "pink";
  }
}
std::string to_string(GridMode g) { return g == GridMode::None ? "none" : "white"; }
std::string to_string(Background b) { return b == Background::White ? "white" : "gray"; }

Orientation orientation_from_string(const std::string& s) {
  if (s == "horizontal") return Orientation::Horizontal;
  if (s == "vertical") return Orientation::Vertical;
  throw InputError("unknown orientation: " + s);
}
BarColor bar_color_from_string(const std::string& s) {
  if (s == "green") return BarColor::Green;
  if (s == "blue") return BarColor::Blue;
  if (s == "pink") return BarColor::Pink;
  throw InputError("unknown bar color: " + s);
}
GridMode grid_from_string(const std::string& s) {
  if (s == "none") return GridMode::None;
  if (s == "white") return GridMode::White;
  throw InputError("unknown grid mode: " + s);
}
Background background_from_string(const std::string& s) {
  if (s == "white") return Background::White;
  if (s == "gray") return Background::Gray;
  throw InputError("unknown background: " + s);
}

std::string to_string(RegionRole r) {
  switch (r) {
    case RegionRole::AxisTitleX: return "axis_title_x";
    case RegionRole::AxisTitleY: return "axis_title_y";
    case RegionRole::TickCategory: return "tick_category";
    default: return "tick_value";
  }
}
RegionRole region_role_from_string(const std::string& s) {
  if (s == "axis_title_x") return RegionRole::AxisTitleX;
  if (s == "axis_title_y") return RegionRole::AxisTitleY;
  if (s == "tick_category") return RegionRole::TickCategory;
  if (s == "tick_value") return RegionRole::TickValue;
  throw InputError("unknown region role: " + s);
}

std::vector<ChartStyle> enumerate_styles() {
  std::vector<ChartStyle> out;
  for (auto o : {Orientation::Horizontal, Orientation::Vertical})
    for (auto c : {BarColor::Green, BarColor::Blue, BarColor::Pink})
      for (auto g : {GridMode::None, GridMode::White})
        for (auto b : {Background::White, Background::Gray})
          out.push_back({o, c, g, b});
  return out;
}

ChartStyle style_for(const std::string& sample_id, uint64_t style_seed) {
  auto styles = enumerate_styles();
  Rng rng(mix_seed(stable_hash(sample_id), style_seed));
  return styles[rng.below(styles.size())];
}

Layout plan_layout(const ChartSpec& spec) {
  const SubTable& st = spec.subtable;
  int n = static_cast<int>(st.rows.size());
  if (n < 1) throw LayoutOverflow("chart has no bars");
  if (spec.canvas_w < 64 || spec.canvas_h < 64) throw LayoutOverflow("canvas too small");

  double vmax = 0;
  for (const auto& row : st.rows) {
    if (!std::isfinite(row.value) || row.value < 0)
      throw LayoutOverflow("bar values must be finite and non-negative");
    vmax = std::max(vmax, row.value);
  }
  if (vmax <= 0) throw LayoutOverflow("all bar values are zero");

  int max_cat_w = 0, max_ann_w = 0;
  for (const auto& row : st.rows) {
    max_cat_w = std::max(max_cat_w, text_width(row.category));
    max_ann_w = std::max(max_ann_w, text_width(row.value_text));
  }

  bool horizontal = spec.style.orientation == Orientation::Horizontal;
  Layout lay;
  const int W = spec.canvas_w, H = spec.canvas_h;

  if (horizontal) {
    lay.plot_x0 = kPad + kFontHeight + kPad + max_cat_w + kPad;
    lay.plot_x1 = W - (kPad + max_ann_w + kPad);
    lay.plot_y0 = kPad;
    lay.plot_y1 = H - (kPad + kFontHeight + kPad + kFontHeight + kPad);
  } else {
    lay.plot_y0 = kPad + kFontHeight + kPad;
    lay.plot_y1 = H - (kPad + kFontHeight + kPad + max_cat_w + kPad);
    lay.plot_x1 = W - (kPad + (max_ann_w + 1) / 2);
    // Left margin needs the tick labels, chosen below from the plot height.
  }

  int plot_h = lay.plot_y1 - lay.plot_y0;
  if (plot_h < 8) throw LayoutOverflow("plot area too short");

  TickSet ticks;
  if (horizontal) {
    int plot_w = lay.plot_x1 - lay.plot_x0;
    if (plot_w < 8) throw LayoutOverflow("plot area too narrow");
    ticks = choose_ticks(vmax, plot_w, true);
  } else {
    ticks = choose_ticks(vmax, plot_h, false);
    int max_tick_w = 0;
    for (const auto& label : ticks.labels) max_tick_w = std::max(max_tick_w, text_width(label));
    lay.plot_x0 = kPad + kFontHeight + kPad + max_tick_w + kPad;
    if (lay.plot_x1 - lay.plot_x0 < 8) throw LayoutOverflow("plot area too narrow");
  }
  lay.tick_values = ticks.values;
  int plot_w = lay.plot_x1 - lay.plot_x0;

  // Each bar owns an equal slot along the category axis.
  int slot_axis = horizontal ? plot_h : plot_w;
  double slot = static_cast<double>(slot_axis) / n;
  int needed = horizontal ? kFontHeight + 2 : kFontHeight + 2;
  if (slot < needed)
    throw LayoutOverflow("category labels need " + std::to_string(needed) +
                         "px per bar, have " + std::to_string(slot_axis) + "px for " +
                         std::to_string(n) + " bars");
  int thickness = std::max(2, static_cast<int>(std::llround(slot * 0.7)));

  const std::string& cat_title = st.category_header;
  const std::string& val_title = st.value_header;

  auto add = [&lay](std::string text, RegionRole role, int x, int y, int w, int h,
                    std::optional<int> bar = std::nullopt) {
    lay.regions.push_back({std::move(text), role, x, y, w, h, bar});
  };

  if (horizontal) {
    for (int i = 0; i < n; ++i) {
      int yc = lay.plot_y0 + static_cast<int>(std::llround((i + 0.5) * slot));
      int len = bar_px(st.rows[i].value, vmax, plot_w);
      lay.bars.push_back({lay.plot_x0, yc - thickness / 2, len, thickness});
      int cw = text_width(st.rows[i].category);
      add(st.rows[i].category, RegionRole::TickCategory, lay.plot_x0 - kPad - cw,
          yc - kFontHeight / 2, cw, kFontHeight, i);
      add(st.rows[i].value_text, RegionRole::TickValue, lay.plot_x0 + len + kPad,
          yc - kFontHeight / 2, text_width(st.rows[i].value_text), kFontHeight, i);
    }
    for (size_t t = 0; t < ticks.values.size(); ++t) {
      int tx = lay.plot_x0 + bar_px(ticks.values[t], vmax, plot_w);
      int lw = text_width(ticks.labels[t]);
      add(ticks.labels[t], RegionRole::TickValue, tx - lw / 2, lay.plot_y1 + kPad, lw,
          kFontHeight);
    }
    int xtw = text_width(val_title);
    add(val_title, RegionRole::AxisTitleX, lay.plot_x0 + (plot_w - xtw) / 2,
        H - kPad - kFontHeight, xtw, kFontHeight);
    // Anchored to the axis origin so the rotated title never lands between
    // two bar rows in reading order.
    int yth = text_width(cat_title);
    add(cat_title, RegionRole::AxisTitleY, kPad, lay.plot_y1 - yth,
        kFontHeight, yth);
  } else {
    for (int i = 0; i < n; ++i) {
      int xc = lay.plot_x0 + static_cast<int>(std::llround((i + 0.5) * slot));
      int len = bar_px(st.rows[i].value, vmax, plot_h);
      lay.bars.push_back({xc - thickness / 2, lay.plot_y1 - len, thickness, len});
      int ch = text_width(st.rows[i].category);
      add(st.rows[i].category, RegionRole::TickCategory, xc - kFontHeight / 2,
          lay.plot_y1 + kPad, kFontHeight, ch, i);
      int aw = text_width(st.rows[i].value_text);
      add(st.rows[i].value_text, RegionRole::TickValue, xc - aw / 2,
          lay.plot_y1 - len - kPad - kFontHeight, aw, kFontHeight, i);
    }
    for (size_t t = 0; t < ticks.values.size(); ++t) {
      int ty = lay.plot_y1 - bar_px(ticks.values[t], vmax, plot_h);
      int lw = text_width(ticks.labels[t]);
      add(ticks.labels[t], RegionRole::TickValue, lay.plot_x0 - kPad - lw,
          ty - kFontHeight / 2, lw, kFontHeight);
    }
    int xtw = text_width(cat_title);
    add(cat_title, RegionRole::AxisTitleX, lay.plot_x0 + (plot_w - xtw) / 2,
        H - kPad - kFontHeight, xtw, kFontHeight);
    int yth = text_width(val_title);
    add(val_title, RegionRole::AxisTitleY, kPad, lay.plot_y1 - yth,
        kFontHeight, yth);
  }

  validate_layout(spec, lay);
  sort_reading_order(lay.regions);
  return lay;
}

ChartArtifact render(const ChartSpec& spec) {
  Layout lay = plan_layout(spec);
  Image img(spec.canvas_w, spec.canvas_h,
            spec.style.background == Background::White ? kWhite : kGrayBg);

  bool horizontal = spec.style.orientation == Orientation::Horizontal;
  double vmax = 0;
  for (const auto& row : spec.subtable.rows) vmax = std::max(vmax, row.value);

  if (spec.style.grid == GridMode::White) {
    for (double tv : lay.tick_values) {
      if (horizontal) {
        int tx = lay.plot_x0 + bar_px(tv, vmax, lay.plot_x1 - lay.plot_x0);
        img.fill_rect(tx, lay.plot_y0, 1, lay.plot_y1 - lay.plot_y0, kWhite);
      } else {
        int ty = lay.plot_y1 - bar_px(tv, vmax, lay.plot_y1 - lay.plot_y0);
        img.fill_rect(lay.plot_x0, ty, lay.plot_x1 - lay.plot_x0, 1, kWhite);
      }
    }
  }

  Rgb fill = bar_rgb(spec.style.bar_color);
  for (const auto& bar : lay.bars) img.fill_rect(bar.x, bar.y, bar.w, bar.h, fill);

  // Axis spines and tick marks.
  img.fill_rect(lay.plot_x0 - 1, lay.plot_y0, 1, lay.plot_y1 - lay.plot_y0 + 1, kInk);
  img.fill_rect(lay.plot_x0 - 1, lay.plot_y1, lay.plot_x1 - lay.plot_x0 + 1, 1, kInk);
  for (double tv : lay.tick_values) {
    if (horizontal) {
      int tx = lay.plot_x0 + bar_px(tv, vmax, lay.plot_x1 - lay.plot_x0);
      img.fill_rect(tx, lay.plot_y1 + 1, 1, 3, kInk);
    } else {
      int ty = lay.plot_y1 - bar_px(tv, vmax, lay.plot_y1 - lay.plot_y0);
      img.fill_rect(lay.plot_x0 - 4, ty, 3, 1, kInk);
    }
  }
  for (const auto& bar : lay.bars) {
    if (horizontal)
      img.fill_rect(lay.plot_x0 - 4, bar.y + bar.h / 2, 3, 1, kInk);
    else
      img.fill_rect(bar.x + bar.w / 2, lay.plot_y1 + 1, 1, 3, kInk);
  }

  for (const auto& r : lay.regions) {
    bool rotated = r.role == RegionRole::AxisTitleY ||
                   (!horizontal && r.role == RegionRole::TickCategory);
    if (rotated)
      draw_text_rotated(img, r.x, r.y, r.text, kInk);
    else
      draw_text(img, r.x, r.y, r.text, kInk);
  }

  return {spec, std::move(lay), img.encode_ppm()};
}

std::string sidecar_to_json(const ChartSpec& spec, const std::vector<LayoutRegion>& regions) {
  json rows = json::array();
  json values = json::array();
  for (const auto& row : spec.subtable.rows) {
    rows.push_back({{"category", row.category},
                    {"value", row.value},
                    {"value_text", row.value_text}});
    values.push_back(row.value);
  }
  json regs = json::array();
  for (const auto& r : regions) {
    json obj = {{"text", r.text}, {"role", to_string(r.role)},
                {"x", r.x},       {"y", r.y},
                {"w", r.w},       {"h", r.h}};
    if (r.bar_index) obj["bar_index"] = *r.bar_index;
    regs.push_back(std::move(obj));
  }
  json doc = {
      {"schema_version", 1},
      {"spec",
       {{"orientation", to_string(spec.style.orientation)},
        {"bar_color", to_string(spec.style.bar_color)},
        {"grid", to_string(spec.style.grid)},
        {"background", to_string(spec.style.background)},
        {"canvas", {{"w", spec.canvas_w}, {"h", spec.canvas_h}}},
        {"subtable",
         {{"category_header", spec.subtable.category_header},
          {"value_header", spec.subtable.value_header},
          {"rows", std::move(rows)}}}}},
      {"regions", std::move(regs)},
      {"values", std::move(values)},
  };
  return doc.dump();
}

Sidecar sidecar_from_json(const std::string& json_text) {
  try {
    json doc = json::parse(json_text);
    Sidecar sc;
    const json& sp = doc.at("spec");
    sc.spec.style.orientation = orientation_from_string(sp.at("orientation").get<std::string>());
    sc.spec.style.bar_color = bar_color_from_string(sp.at("bar_color").get<std::string>());
    sc.spec.style.grid = grid_from_string(sp.at("grid").get<std::string>());
    sc.spec.style.background = background_from_string(sp.at("background").get<std::string>());
    sc.spec.canvas_w = sp.at("canvas").at("w").get<int>();
    sc.spec.canvas_h = sp.at("canvas").at("h").get<int>();
    const json& st = sp.at("subtable");
    sc.spec.subtable.category_header = st.at("category_header").get<std::string>();
    sc.spec.subtable.value_header = st.at("value_header").get<std::string>();
    for (const auto& row : st.at("rows")) {
      sc.spec.subtable.rows.push_back({row.at("category").get<std::string>(),
                                       row.at("value").get<double>(),
                                       row.at("value_text").get<std::string>()});
    }
    for (const auto& r : doc.at("regions")) {
      LayoutRegion reg;
      reg.text = r.at("text").get<std::string>();
      reg.role = region_role_from_string(r.at("role").get<std::string>());
      reg.x = r.at("x").get<int>();
      reg.y = r.at("y").get<int>();
      reg.w = r.at("w").get<int>();
      reg.h = r.at("h").get<int>();
      if (r.contains("bar_index")) reg.bar_index = r.at("bar_index").get<int>();
      sc.regions.push_back(std::move(reg));
    }
    return sc;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed sidecar: ") + e.what());
  }
}

std::string layout_to_svg(const ChartSpec& spec, const Layout& layout) {
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(spec.canvas_w) + "\" height=\"" +
                    std::to_string(spec.canvas_h) + "\">\n";
  for (const auto& bar : layout.bars) {
    svg += "  <rect x=\"" + std::to_string(bar.x) + "\" y=\"" + std::to_string(bar.y) +
           "\" width=\"" + std::to_string(bar.w) + "\" height=\"" + std::to_string(bar.h) +
           "\" fill=\"" + to_string(spec.style.bar_color) + "\"/>\n";
  }
  for (const auto& r : layout.regions) {
    svg += "  <rect x=\"" + std::to_string(r.x) + "\" y=\"" + std::to_string(r.y) +
           "\" width=\"" + std::to_string(r.w) + "\" height=\"" + std::to_string(r.h) +
           "\" fill=\"none\" stroke=\"red\"><title>" + to_string(r.role) + ": " + r.text +
           "</title></rect>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace chartfc
