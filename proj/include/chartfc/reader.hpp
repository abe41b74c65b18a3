#pragma once
// Chart readers turn a rendered chart back into positioned text, either
// from the ground-truth sidecar or through an external OCR adapter.
// Role classification afterwards is geometry-only, so it works the same
// on both sources.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chartfc/chart.hpp"

namespace chartfc {

struct TextRegion {
  std::string text;
  int x = 0, y = 0, w = 0, h = 0;

  double x_center() const { return x + w / 2.0; }
  double y_center() const { return y + h / 2.0; }
  bool operator==(const TextRegion&) const = default;
};

struct ReadOutput {
  int canvas_w = 0;
  int canvas_h = 0;
  std::vector<TextRegion> regions;  // always in reading order
  bool operator==(const ReadOutput&) const = default;
};

// Loads the sidecar written next to a rendered chart. Text and geometry
// come back exactly as rendered. Throws MissingSidecar if absent.
ReadOutput read_oracle(const std::string& sidecar_path);

// Sends PPM bytes to an OCR adapter and returns its regions, re-sorted
// into reading order. endpoint is either "http://host:port" (POST /ocr)
// or "exec:command" (one JSON request on stdin, one JSON reply on
// stdout). The reply must echo the request id.
ReadOutput read_ocr(const std::vector<uint8_t>& ppm_bytes, const std::string& endpoint);
ReadOutput read_ocr_file(const std::string& image_path, const std::string& endpoint);

struct NoiseConfig {
  double p_drop = 0;   // chance a region disappears
  double p_sub = 0;    // per-character substitution chance
  int jitter_px = 0;   // uniform box offset in [-jitter, +jitter]
};

// Degrades a read deterministically under the given seed. All-zero noise
// returns the input unchanged.
ReadOutput perturb(const ReadOutput& input, const NoiseConfig& noise, uint64_t seed);

struct ClassifiedRegion {
  TextRegion region;
  RegionRole role = RegionRole::TickValue;
  // For tick_category: bar position (0 = top bar on horizontal charts,
  // leftmost on vertical). For in-plot tick_value: the bar it annotates,
  // when one aligns; gridline labels have none.
  std::optional<int> bar_index;
  // True for tick_value labels sitting on the value axis itself, as
  // opposed to per-bar annotations inside the plot.
  bool gridline = false;
};

struct ClassifyResult {
  Orientation orientation = Orientation::Horizontal;
  std::vector<ClassifiedRegion> regions;  // same order as the input
};

// Assigns a role to every region from geometry alone: the bottom-most
// region is the x-axis title, the left-most remaining one the y-axis
// title, aligned bands give tick labels, and in-plot annotations pair
// with the category tick they line up with. Orientation follows from
// which band the annotations align with. Translation-invariant.
// Throws Unclassifiable when no consistent assignment exists.
ClassifyResult classify_roles(const ReadOutput& input);

}  // namespace chartfc
