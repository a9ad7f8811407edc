#include "morphocv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace morphocv {
namespace {

constexpr double kRelTieTolerance = 1e-9;

// z-component of (a - o) x (b - o) with x = col, y = row.
double cross(const Point& o, const Point& a, const Point& b) {
  return (a.col - o.col) * (b.row - o.row) - (a.row - o.row) * (b.col - o.col);
}

double normalized_angle_deg(double drow, double dcol) {
  double a = std::atan2(drow, dcol) * (180.0 / std::numbers::pi);
  a = std::fmod(a, 180.0);
  if (a < 0.0) a += 180.0;
  if (a >= 180.0 || 180.0 - a < 1e-9) a = 0.0;
  if (a < 1e-9) a = 0.0;
  return a + 0.0;
}

void require_nonempty(const BinaryMask& mask) {
  if (mask.empty() || popcount(mask) == 0) {
    throw Error(Errc::kEmptyMask, "mask has no foreground pixels");
  }
}

}  // namespace

LabelGrid label_components(const BinaryMask& mask) {
  const std::size_t rows = mask.rows();
  const std::size_t cols = mask.cols();
  if (mask.empty()) return {};

  // Flood fill in raster order; provisional ids follow discovery order, so
  // the first pixel of each component is its raster-order minimum.
  std::vector<std::uint32_t> provisional(mask.size(), 0);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask.values()[start] || provisional[start]) continue;
    const auto id = static_cast<std::uint32_t>(sizes.size() + 1);
    std::size_t count = 0;
    provisional[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t at = stack.back();
      stack.pop_back();
      ++count;
      const std::size_t r = at / cols;
      const std::size_t c = at % cols;
      const std::size_t r0 = r > 0 ? r - 1 : r;
      const std::size_t r1 = r + 1 < rows ? r + 1 : r;
      const std::size_t c0 = c > 0 ? c - 1 : c;
      const std::size_t c1 = c + 1 < cols ? c + 1 : c;
      for (std::size_t rr = r0; rr <= r1; ++rr) {
        for (std::size_t cc = c0; cc <= c1; ++cc) {
          const std::size_t n = rr * cols + cc;
          if (mask.values()[n] && !provisional[n]) {
            provisional[n] = id;
            stack.push_back(n);
          }
        }
      }
    }
    sizes.push_back(count);
  }

  std::vector<std::uint32_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return sizes[a] > sizes[b];
  });
  std::vector<std::uint32_t> final_id(sizes.size() + 1, 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    final_id[order[k] + 1] = static_cast<std::uint32_t>(k + 1);
  }

  LabelGrid labels(rows, cols);
  auto out = labels.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = final_id[provisional[i]];
  return labels;
}

std::vector<BinaryMask> connected_components(const BinaryMask& mask) {
  std::vector<BinaryMask> components;
  if (mask.empty()) return components;
  const LabelGrid labels = label_components(mask);
  std::uint32_t count = 0;
  for (std::uint32_t v : labels.values()) count = std::max(count, v);
  components.assign(count, BinaryMask(mask.rows(), mask.cols()));
  auto src = labels.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i]) components[src[i] - 1].values()[i] = 1;
  }
  return components;
}

std::vector<Point> convex_hull(std::span<const Point> points) {
  if (points.empty()) throw Error(Errc::kEmptyInput, "convex hull of no points");

  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.col < b.col || (a.col == b.col && a.row < b.row);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  // Andrew's monotone chain; strict turns only, so collinear points drop out.
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<Point> boundary_corner_points(const BinaryMask& mask) {
  std::vector<Point> corners;
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    auto row = mask.row(r);
    auto first = std::find_if(row.begin(), row.end(), [](auto v) { return v != 0; });
    if (first == row.end()) continue;
    auto last = std::find_if(row.rbegin(), row.rend(), [](auto v) { return v != 0; });
    const auto c0 = static_cast<double>(first - row.begin());
    const auto c1 = static_cast<double>(row.rend() - last);
    const auto top = static_cast<double>(r);
    corners.push_back({top, c0});
    corners.push_back({top + 1.0, c0});
    corners.push_back({top, c1});
    corners.push_back({top + 1.0, c1});
  }
  return corners;
}

RotatedBox min_area_rect(std::span<const Point> hull) {
  const std::size_t n = hull.size();
  if (n < 3) {
    throw Error(Errc::kInvalidArgument, "rotating calipers needs a polygon with area");
  }
  const auto at = [&](std::size_t i) -> const Point& { return hull[i % n]; };

  RotatedBox best;
  double best_area = 0.0;
  bool have_best = false;

  // Calipers: j maximizes the projection on the edge direction, k the
  // projection on the inward normal, m minimizes the edge projection. All
  // three only move forward as the base edge advances.
  std::size_t j = 1, k = 1, m = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = at(i);
    const Point& b = at(i + 1);
    const double len = std::hypot(b.row - a.row, b.col - a.col);
    const double u_row = (b.row - a.row) / len;
    const double u_col = (b.col - a.col) / len;
    const double v_row = u_col;
    const double v_col = -u_row;

    const auto proj_u = [&](std::size_t t) {
      return (at(t).row - a.row) * u_row + (at(t).col - a.col) * u_col;
    };
    const auto proj_v = [&](std::size_t t) {
      return (at(t).row - a.row) * v_row + (at(t).col - a.col) * v_col;
    };

    j = std::max(j, i + 1);
    while (proj_u(j + 1) > proj_u(j)) ++j;
    k = std::max(k, j);
    while (proj_v(k + 1) > proj_v(k)) ++k;
    m = std::max(m, k);
    while (proj_u(m + 1) < proj_u(m)) ++m;

    const double min_u = proj_u(m);
    const double max_u = proj_u(j);
    const double max_v = proj_v(k);
    const double along = max_u - min_u;
    const double across = max_v;
    const double area = along * across;

    const double angle_u = normalized_angle_deg(u_row, u_col);
    const double angle_v = normalized_angle_deg(v_row, v_col);
    const double side_tol = kRelTieTolerance * std::max(along, across);
    double angle = 0.0;
    if (along > across + side_tol) {
      angle = angle_u;
    } else if (across > along + side_tol) {
      angle = angle_v;
    } else {
      angle = std::min(angle_u, angle_v);
    }

    const double area_tol = kRelTieTolerance * std::max(area, best_area);
    const bool better = !have_best || area < best_area - area_tol ||
                        (area <= best_area + area_tol && angle < best.angle_deg);
    if (!better) continue;

    have_best = true;
    best_area = area;
    const auto place = [&](double pu, double pv) {
      return Point{a.row + pu * u_row + pv * v_row, a.col + pu * u_col + pv * v_col};
    };
    best.length = std::max(along, across);
    best.width = std::min(along, across);
    best.angle_deg = angle;
    best.center = place(0.5 * (min_u + max_u), 0.5 * max_v);
    best.corners = {place(min_u, 0.0), place(max_u, 0.0), place(max_u, max_v),
                    place(min_u, max_v)};
  }
  return best;
}

RotatedBox min_rotated_rect(const BinaryMask& mask) {
  require_nonempty(mask);
  const std::vector<Point> corners = boundary_corner_points(mask);
  return min_area_rect(convex_hull(corners));
}

Point centroid(const BinaryMask& mask) {
  require_nonempty(mask);
  std::uint64_t sum_r = 0, sum_c = 0, count = 0;
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    auto row = mask.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!row[c]) continue;
      sum_r += r;
      sum_c += c;
      ++count;
    }
  }
  const auto n = static_cast<double>(count);
  return {static_cast<double>(sum_r) / n + 0.5, static_cast<double>(sum_c) / n + 0.5};
}

FeatureRecord features_2d(const BinaryMask& mask, const InstanceMeta& meta,
                          const Calibration& cal) {
  cal.validate();
  const RotatedBox box = min_rotated_rect(mask);
  const Point center = centroid(mask);

  // Top-left / bottom-right of a rotated box: the corners with the smallest
  // and largest row + col (ties go to the smaller / larger row).
  const auto key = [](const Point& p) { return p.row + p.col; };
  Point top_left = box.corners[0];
  Point bottom_right = box.corners[0];
  for (const Point& p : box.corners) {
    if (key(p) < key(top_left) || (key(p) == key(top_left) && p.row < top_left.row)) {
      top_left = p;
    }
    if (key(p) > key(bottom_right) ||
        (key(p) == key(bottom_right) && p.row > bottom_right.row)) {
      bottom_right = p;
    }
  }

  const double k = cal.ppm;
  const auto scale = [k](const Point& p) { return Point{p.row / k, p.col / k}; };

  FeatureRecord rec;
  rec.meta = meta;
  rec.cal = cal;
  rec.f2d.dorsal_length = box.length / k;
  rec.f2d.abdominal_width = box.width / k;
  rec.f2d.area = static_cast<double>(popcount(mask)) / (k * k);
  rec.f2d.centroid = scale(center);
  rec.f2d.bbox_topleft = scale(top_left);
  rec.f2d.bbox_bottomright = scale(bottom_right);
  rec.f2d.rotated_angle_deg = box.angle_deg;
  return rec;
}

}  // namespace morphocv
