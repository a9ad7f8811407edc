#include <algorithm>
#include <cmath>

#include "morphocv/grid.hpp"
#include "morphocv/types.hpp"

namespace morphocv {

BinaryMask mask_of(const LabelGrid& labels, std::uint32_t id) {
  BinaryMask mask(labels.rows(), labels.cols());
  auto src = labels.values();
  auto dst = mask.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == id ? 1 : 0;
  return mask;
}

std::size_t popcount(const BinaryMask& mask) {
  auto v = mask.values();
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(),
                                                [](std::uint8_t x) { return x != 0; }));
}

void Calibration::validate() const {
  if (!(std::isfinite(ppm) && ppm > 0.0)) {
    throw Error(Errc::kInvalidArgument, "ppm must be a finite value > 0");
  }
  if (!(std::isfinite(camera_to_ground_m) && camera_to_ground_m > 0.0)) {
    throw Error(Errc::kInvalidArgument, "camera distance must be a finite value > 0");
  }
}

}  // namespace morphocv
