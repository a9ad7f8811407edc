#pragma once

#include <array>
#include <span>
#include <vector>

#include "morphocv/grid.hpp"
#include "morphocv/types.hpp"

namespace morphocv {

// Minimum-area enclosing rectangle. length >= width; angle_deg in [0, 180)
// is the direction of the long side, measured from +col toward +row.
// corners go around the rectangle in order.
struct RotatedBox {
  Point center;
  double length = 0.0;
  double width = 0.0;
  double angle_deg = 0.0;
  std::array<Point, 4> corners{};
};

// 8-connected components, largest first; equal sizes ordered by the
// raster-order position of each component's first pixel.
std::vector<BinaryMask> connected_components(const BinaryMask& mask);

// Same partition as connected_components, as one grid: component k of that
// list carries id k + 1.
LabelGrid label_components(const BinaryMask& mask);

// Counterclockwise in the (col, row) plane, starting from the smallest
// (col, row) point. Collinear and duplicate points are dropped.
std::vector<Point> convex_hull(std::span<const Point> points);

// Corners of every foreground pixel that can lie on the hull (the extreme
// pixels of each row).
std::vector<Point> boundary_corner_points(const BinaryMask& mask);

// Minimum-area rectangle of a convex polygon via rotating calipers. The
// polygon must come from convex_hull and have at least 3 vertices.
RotatedBox min_area_rect(std::span<const Point> hull);

RotatedBox min_rotated_rect(const BinaryMask& mask);

// Mean of foreground pixel centers.
Point centroid(const BinaryMask& mask);

FeatureRecord features_2d(const BinaryMask& mask, const InstanceMeta& meta,
                          const Calibration& cal);

}  // namespace morphocv
