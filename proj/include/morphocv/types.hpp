#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace morphocv {

struct InstanceMeta {
  std::uint32_t id = 0;
  std::string label = "object";
  double score = 1.0;

  friend bool operator==(const InstanceMeta&, const InstanceMeta&) = default;
};

// ppm converts pixels to meters; camera_to_ground_m is the mounting height
// used to turn depth into height above ground.
struct Calibration {
  double ppm = 1.0;
  double camera_to_ground_m = 2.5;

  void validate() const;

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

struct Point {
  double row = 0.0;
  double col = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Units are pixels when ppm == 1 and meters otherwise.
struct Features2D {
  double dorsal_length = 0.0;
  double abdominal_width = 0.0;
  double area = 0.0;
  Point centroid;
  Point bbox_topleft;
  Point bbox_bottomright;
  double rotated_angle_deg = 0.0;

  friend bool operator==(const Features2D&, const Features2D&) = default;
};

struct Features3D {
  double height_average_m = 0.0;
  double height_centroid_m = 0.0;
  double volume = 0.0;

  friend bool operator==(const Features3D&, const Features3D&) = default;
};

struct FeatureRecord {
  InstanceMeta meta;
  Features2D f2d;
  std::optional<Features3D> f3d;
  Calibration cal;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

}  // namespace morphocv
