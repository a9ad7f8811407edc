#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "morphocv/grid.hpp"
#include "morphocv/types.hpp"

namespace morphocv {

struct PipelineParams {
  Calibration cal;
  // Gaussian standard deviation in pixels; 0 disables smoothing.
  double sigma = 0.0;

  void validate() const;
};

// Meters above the ground plane.
using HeightField = Grid<double>;

struct SurfaceGrid {
  std::size_t rows = 0;  // after striding
  std::size_t cols = 0;
  std::size_t stride = 1;
  std::string unit = "m";
  HeightField heights;
};

// Elementwise depth * mask.
DepthGrid clean_roi(const DepthGrid& depth, const BinaryMask& mask);

// Every zero cell becomes the mean of the nonzero cells.
DepthGrid fill_zeros_with_mean(const DepthGrid& cleaned);

// Normalized kernel of radius ceil(3 sigma); element r is the center tap.
std::vector<double> gaussian_kernel(double sigma);

// Mirror index into [0, n) without repeating the edge sample (... c b | a b c ...).
std::size_t reflect_index(long i, std::size_t n);

// Separable Gaussian with reflected borders. sigma == 0 returns the input.
DepthGrid gaussian_filter(const DepthGrid& grid, double sigma);

// max(0, camera_to_ground - depth).
HeightField height_field(const DepthGrid& filtered, const Calibration& cal);

// clean_roi -> fill_zeros_with_mean -> gaussian_filter -> height_field.
HeightField processed_heights(const DepthGrid& depth, const BinaryMask& mask,
                              const PipelineParams& params);

FeatureRecord features_3d(const DepthGrid& depth, const BinaryMask& mask,
                          const InstanceMeta& meta, const PipelineParams& params);

SurfaceGrid surface_export(const DepthGrid& depth, const BinaryMask& mask,
                           const PipelineParams& params, std::size_t max_dim = 256);

// {"rows":R,"cols":C,"stride":s,"unit":"m","heights":[[...],...]}
std::string surface_to_json(const SurfaceGrid& surface);

}  // namespace morphocv
