#include "morphocv/rendering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace morphocv {
namespace {

constexpr double kGoldenAngleDeg = 137.508;
constexpr int kGlyphAdvance = 6;
constexpr int kGlyphHeight = 7;

std::uint8_t to_channel(double unit) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(unit, 0.0, 1.0) * 255.0));
}

std::uint8_t blend_half(std::uint8_t base, std::uint8_t over) {
  return static_cast<std::uint8_t>((base + over + 1) / 2);
}

void put(RgbImage& img, long r, long c, Rgb color) {
  if (r < 0 || c < 0 || r >= static_cast<long>(img.rows()) ||
      c >= static_cast<long>(img.cols())) {
    return;
  }
  img(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = color;
}

// Paints pixels whose centers are within 1 px of segment ab (a 2 px stroke).
void draw_segment(RgbImage& img, const Point& a, const Point& b, Rgb color) {
  constexpr double kHalfWidth = 1.0;
  const long r0 = static_cast<long>(std::floor(std::min(a.row, b.row) - 2.0));
  const long r1 = static_cast<long>(std::ceil(std::max(a.row, b.row) + 2.0));
  const long c0 = static_cast<long>(std::floor(std::min(a.col, b.col) - 2.0));
  const long c1 = static_cast<long>(std::ceil(std::max(a.col, b.col) + 2.0));
  const double dr = b.row - a.row;
  const double dc = b.col - a.col;
  const double len2 = dr * dr + dc * dc;
  for (long r = std::max(r0, 0L); r <= std::min(r1, static_cast<long>(img.rows()) - 1); ++r) {
    for (long c = std::max(c0, 0L); c <= std::min(c1, static_cast<long>(img.cols()) - 1); ++c) {
      const double pr = static_cast<double>(r) + 0.5;
      const double pc = static_cast<double>(c) + 0.5;
      double t = len2 > 0.0 ? ((pr - a.row) * dr + (pc - a.col) * dc) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double er = pr - (a.row + t * dr);
      const double ec = pc - (a.col + t * dc);
      if (er * er + ec * ec <= kHalfWidth * kHalfWidth) put(img, r, c, color);
    }
  }
}

}  // namespace

Rgb colormap(double v) {
  v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  const auto channel = [v](double center) {
    return to_channel(1.5 - std::abs(4.0 * v - center));
  };
  return {channel(3.0), channel(2.0), channel(1.0)};
}

RgbImage depth_to_heatmap(const DepthGrid& depth) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (double z : depth.values()) {
    if (z == 0.0) continue;
    lo = any ? std::min(lo, z) : z;
    hi = any ? std::max(hi, z) : z;
    any = true;
  }
  const bool flat = !any || hi == lo;

  RgbImage img(depth.rows(), depth.cols());
  auto src = depth.values();
  auto dst = img.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    double v = 1.0;
    if (flat) {
      v = 0.0;
    } else if (src[i] != 0.0) {
      v = (src[i] - lo) / (hi - lo);
    }
    dst[i] = colormap(v);
  }
  return img;
}

Rgb instance_color(std::size_t index) {
  const double hue = std::fmod(static_cast<double>(index) * kGoldenAngleDeg, 360.0);
  const double h6 = hue / 60.0;
  const int sector = static_cast<int>(std::floor(h6)) % 6;
  const double f = h6 - std::floor(h6);
  const double q = 1.0 - f;
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = 1; g = f; b = 0; break;
    case 1: r = q; g = 1; b = 0; break;
    case 2: r = 0; g = 1; b = f; break;
    case 3: r = 0; g = q; b = 1; break;
    case 4: r = f; g = 0; b = 1; break;
    default: r = 1; g = 0; b = q; break;
  }
  return {to_channel(r), to_channel(g), to_channel(b)};
}

void draw_text(RgbImage& img, std::string_view text, long top, long left, Rgb color) {
  long x = left;
  for (char ch : text) {
    const auto cols = glyph(ch);
    for (int c = 0; c < 5; ++c) {
      for (int r = 0; r < kGlyphHeight; ++r) {
        if (cols[static_cast<std::size_t>(c)] & (1u << r)) put(img, top + r, x + c, color);
      }
    }
    x += kGlyphAdvance;
  }
}

RgbImage render_overlay(const RgbImage& base, const InstanceSet& instances,
                        std::span<const RotatedBox> boxes) {
  if (instances.metas.empty()) return base;
  require_same_shape(base, instances.labels, "overlay base and label dimensions differ");
  if (!boxes.empty() && boxes.size() != instances.metas.size()) {
    throw Error(Errc::kInvalidArgument, "one rotated box per instance is required");
  }

  std::vector<Rgb> colors;
  for (std::size_t i = 0; i < instances.metas.size(); ++i) colors.push_back(instance_color(i));

  RgbImage out = base;
  {
    // id -> position in metas
    std::vector<std::pair<std::uint32_t, std::size_t>> slot;
    for (std::size_t i = 0; i < instances.metas.size(); ++i) {
      slot.emplace_back(instances.metas[i].id, i);
    }
    std::sort(slot.begin(), slot.end());
    auto ids = instances.labels.values();
    auto px = out.values();
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (!ids[i]) continue;
      auto it = std::lower_bound(slot.begin(), slot.end(), std::make_pair(ids[i], std::size_t{0}));
      if (it == slot.end() || it->first != ids[i]) continue;
      const Rgb c = colors[it->second];
      px[i] = {blend_half(px[i].r, c.r), blend_half(px[i].g, c.g), blend_half(px[i].b, c.b)};
    }
  }

  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& corners = boxes[i].corners;
    for (std::size_t e = 0; e < 4; ++e) {
      draw_segment(out, corners[e], corners[(e + 1) % 4], colors[i]);
    }
  }

  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Point* top = &boxes[i].corners[0];
    for (const Point& p : boxes[i].corners) {
      if (p.row < top->row || (p.row == top->row && p.col < top->col)) top = &p;
    }
    char score[32];
    std::snprintf(score, sizeof score, "%.3f", instances.metas[i].score);
    const std::string caption = instances.metas[i].label + " " + score;
    const long text_top = std::max(0L, static_cast<long>(std::floor(top->row)) - kGlyphHeight - 2);
    const long width = static_cast<long>(caption.size()) * kGlyphAdvance;
    long text_left = static_cast<long>(std::floor(top->col));
    text_left = std::max(0L, std::min(text_left, static_cast<long>(out.cols()) - width));
    draw_text(out, caption, text_top, text_left, colors[i]);
  }
  return out;
}

}  // namespace morphocv
