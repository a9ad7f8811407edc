#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphocv/grid.hpp"
#include "morphocv/types.hpp"

namespace morphocv {

// Comma-separated rows of non-negative meters, no header. LF or CRLF.
DepthGrid read_depth_csv(std::string_view bytes);
std::string write_depth_csv(const DepthGrid& depth);

// 8-bit (or lower) single-channel PNG; pixel value is the instance id.
LabelGrid read_label_png(std::string_view bytes);
// Fails with kInvalidArgument when an id does not fit in 8 bits.
std::string write_label_png(const LabelGrid& labels);

// Feature table column names, in output order.
std::span<const std::string_view> feature_columns_2d();
std::span<const std::string_view> feature_columns_3d();

std::string write_features_csv(std::span<const FeatureRecord> records);

// Six significant digits, %g style, ties to even on the exact binary value.
std::string format_number(double value);
// The double nearest to format_number(value).
double round_sig6(double value);

}  // namespace morphocv
