#include "morphocv/depth3d.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "morphocv/geometry.hpp"
#include "morphocv/raster_io.hpp"

namespace morphocv {

void PipelineParams::validate() const {
  cal.validate();
  if (std::isnan(sigma) || sigma < 0.0) {
    throw Error(Errc::kNegativeSigma, "Gaussian sigma must be >= 0");
  }
  if (!std::isfinite(sigma)) throw Error(Errc::kInvalidArgument, "sigma must be finite");
}

DepthGrid clean_roi(const DepthGrid& depth, const BinaryMask& mask) {
  require_same_shape(depth, mask, "depth and mask dimensions differ");
  DepthGrid out(depth.rows(), depth.cols());
  auto d = depth.values();
  auto m = mask.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = m[i] ? d[i] : 0.0;
  return out;
}

DepthGrid fill_zeros_with_mean(const DepthGrid& cleaned) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : cleaned.values()) {
    if (v != 0.0) {
      sum += v;
      ++count;
    }
  }
  if (count == 0) {
    throw Error(Errc::kEmptyRoi, "region of interest has no valid depth readings");
  }
  const double mean = sum / static_cast<double>(count);
  DepthGrid out = cleaned;
  for (double& v : out.values()) {
    if (v == 0.0) v = mean;
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (std::isnan(sigma) || sigma < 0.0) {
    throw Error(Errc::kNegativeSigma, "Gaussian sigma must be >= 0");
  }
  if (sigma == 0.0) return {1.0};
  const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (long k = -radius; k <= radius; ++k) {
    const double x = static_cast<double>(k);
    w[static_cast<std::size_t>(k + radius)] = std::exp(-(x * x) / (2.0 * sigma * sigma));
  }
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

std::size_t reflect_index(long i, std::size_t n) {
  if (n == 1) return 0;
  const long period = 2 * (static_cast<long>(n) - 1);
  long r = i % period;
  if (r < 0) r += period;
  if (r >= static_cast<long>(n)) r = period - r;
  return static_cast<std::size_t>(r);
}

DepthGrid gaussian_filter(const DepthGrid& grid, double sigma) {
  const std::vector<double> w = gaussian_kernel(sigma);
  if (w.size() == 1) return grid;
  const long radius = static_cast<long>(w.size() / 2);
  const std::size_t rows = grid.rows();
  const std::size_t cols = grid.cols();

  // Horizontal pass, then vertical. Taps are summed in a fixed order.
  DepthGrid tmp(rows, cols);
  std::vector<std::size_t> col_index(cols * w.size());
  for (std::size_t c = 0; c < cols; ++c) {
    for (long k = -radius; k <= radius; ++k) {
      col_index[c * w.size() + static_cast<std::size_t>(k + radius)] =
          reflect_index(static_cast<long>(c) + k, cols);
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    auto src = grid.row(r);
    auto dst = tmp.row(r);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t* idx = &col_index[c * w.size()];
      double acc = 0.0;
      for (std::size_t t = 0; t < w.size(); ++t) acc += w[t] * src[idx[t]];
      dst[c] = acc;
    }
  }

  DepthGrid out(rows, cols);
  std::vector<double> acc(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (long k = -radius; k <= radius; ++k) {
      const double wk = w[static_cast<std::size_t>(k + radius)];
      auto src = tmp.row(reflect_index(static_cast<long>(r) + k, rows));
      for (std::size_t c = 0; c < cols; ++c) acc[c] += wk * src[c];
    }
    std::copy(acc.begin(), acc.end(), out.row(r).begin());
  }
  return out;
}

HeightField height_field(const DepthGrid& filtered, const Calibration& cal) {
  cal.validate();
  HeightField heights(filtered.rows(), filtered.cols());
  auto src = filtered.values();
  auto dst = heights.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = std::max(0.0, cal.camera_to_ground_m - src[i]);
  }
  return heights;
}

HeightField processed_heights(const DepthGrid& depth, const BinaryMask& mask,
                              const PipelineParams& params) {
  params.validate();
  require_same_shape(depth, mask, "depth and mask dimensions differ");
  if (popcount(mask) == 0) throw Error(Errc::kEmptyMask, "mask has no foreground pixels");
  const DepthGrid filled = fill_zeros_with_mean(clean_roi(depth, mask));
  return height_field(gaussian_filter(filled, params.sigma), params.cal);
}

FeatureRecord features_3d(const DepthGrid& depth, const BinaryMask& mask,
                          const InstanceMeta& meta, const PipelineParams& params) {
  const HeightField heights = processed_heights(depth, mask, params);
  FeatureRecord rec = features_2d(mask, meta, params.cal);

  double sum = 0.0;
  std::size_t count = 0;
  auto h = heights.values();
  auto m = mask.values();
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (m[i]) {
      sum += h[i];
      ++count;
    }
  }

  // Height at the pixel containing the centroid (in pixel units).
  const Point center = centroid(mask);
  const auto cr = static_cast<std::size_t>(std::floor(center.row));
  const auto cc = static_cast<std::size_t>(std::floor(center.col));

  const double k = params.cal.ppm;
  rec.f3d = Features3D{
      .height_average_m = sum / static_cast<double>(count),
      .height_centroid_m = heights(cr, cc),
      .volume = sum / (k * k),
  };
  return rec;
}

SurfaceGrid surface_export(const DepthGrid& depth, const BinaryMask& mask,
                           const PipelineParams& params, std::size_t max_dim) {
  if (max_dim == 0) throw Error(Errc::kInvalidArgument, "max_dim must be >= 1");
  const HeightField full = processed_heights(depth, mask, params);

  const std::size_t longest = std::max(full.rows(), full.cols());
  const std::size_t stride = (longest + max_dim - 1) / max_dim;
  const std::size_t rows = (full.rows() + stride - 1) / stride;
  const std::size_t cols = (full.cols() + stride - 1) / stride;

  SurfaceGrid surface;
  surface.rows = rows;
  surface.cols = cols;
  surface.stride = stride;
  surface.heights = HeightField(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      surface.heights(r, c) = full(r * stride, c * stride);
    }
  }
  return surface;
}

std::string surface_to_json(const SurfaceGrid& surface) {
  nlohmann::ordered_json j;
  j["rows"] = surface.rows;
  j["cols"] = surface.cols;
  j["stride"] = surface.stride;
  j["unit"] = surface.unit;
  auto& heights = j["heights"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < surface.rows; ++r) {
    auto row = nlohmann::ordered_json::array();
    for (double v : surface.heights.row(r)) row.push_back(round_sig6(v));
    heights.push_back(std::move(row));
  }
  return j.dump();
}

}  // namespace morphocv
