#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "morphocv/geometry.hpp"
#include "morphocv/grid.hpp"
#include "morphocv/segmentation.hpp"

namespace morphocv {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using RgbImage = Grid<Rgb>;

// Piecewise-linear jet-like map of v in [0, 1].
Rgb colormap(double v);

// Nonzero cells are normalized to [0, 1] by their min/max; missing cells map
// to v = 1. A flat or all-missing grid maps every cell to v = 0.
RgbImage depth_to_heatmap(const DepthGrid& depth);

// Fully saturated color for the instance at position `index`, hue stepped by
// the golden angle.
Rgb instance_color(std::size_t index);

// Draws each instance of `instances` (colored by its position in the list)
// blended at 50%, its rotated box outline, and a "label score" caption.
// `boxes` is either empty or parallel to instances.metas.
RgbImage render_overlay(const RgbImage& base, const InstanceSet& instances,
                        std::span<const RotatedBox> boxes);

// 5x7 ASCII glyph; bit r of column c set means pixel (r, c) is ink.
std::span<const std::uint8_t, 5> glyph(char ch);

void draw_text(RgbImage& img, std::string_view text, long top, long left, Rgb color);

// 8-bit RGB, non-interlaced.
std::string encode_png(const RgbImage& img);
// Any PNG, converted to 8-bit RGB.
RgbImage decode_png(std::string_view bytes);

}  // namespace morphocv
