#pragma once
// Embedded 5x7 bitmap font with fixed metrics. Text measurement depends
// only on these constants, so layout is identical on every platform.

#include <string>

#include "chartfc/image.hpp"

namespace chartfc {

inline constexpr int kFontScale = 2;
inline constexpr int kGlyphCols = 5;
inline constexpr int kGlyphRows = 7;
inline constexpr int kFontAdvance = (kGlyphCols + 1) * kFontScale;  // per character
inline constexpr int kFontHeight = kGlyphRows * kFontScale;

// Pixel width of a rendered string (trailing inter-glyph gap dropped).
int text_width(const std::string& s);

// Draws s with its top-left corner at (x, y).
void draw_text(Image& img, int x, int y, const std::string& s, Rgb color);

// Draws s rotated 90 degrees counter-clockwise (reads bottom-to-top) with
// the bounding box top-left at (x, y). Box is kFontHeight wide and
// text_width(s) tall.
void draw_text_rotated(Image& img, int x, int y, const std::string& s, Rgb color);

}  // namespace chartfc
