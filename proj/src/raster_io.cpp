#include "morphocv/raster_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace morphocv {
namespace {

constexpr std::array<std::string_view, 13> kColumns2d = {
    "id",
    "label",
    "score",
    "Dorsal_length",
    "Abdominal_width",
    "Area",
    "Centroid_x",
    "Centroid_y",
    "bbox_topleft_x",
    "bbox_topleft_y",
    "bbox_bottomright_x",
    "bbox_bottomright_y",
    "bbox_rotatedangle",
};

constexpr std::array<std::string_view, 16> kColumns3d = {
    "id",
    "label",
    "score",
    "Dorsal_length",
    "Abdominal_width",
    "Area",
    "Centroid_x",
    "Centroid_y",
    "bbox_topleft_x",
    "bbox_topleft_y",
    "bbox_bottomright_x",
    "bbox_bottomright_y",
    "bbox_rotatedangle",
    "Height_average",
    "Height_centroid",
    "Volume",
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string cell_position(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row + 1) + ", column " + std::to_string(col + 1);
}

double parse_cell(std::string_view token, std::size_t row, std::size_t col) {
  std::string_view t = trim(token);
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double value = 0.0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value,
                                   std::chars_format::general);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size() ||
      !std::isfinite(value)) {
    throw Error(Errc::kNonNumericCell, "non-numeric depth value '" +
                                           std::string(token) + "' at " +
                                           cell_position(row, col));
  }
  if (value < 0.0) {
    throw Error(Errc::kNegativeDepth, "negative depth value '" + std::string(token) +
                                          "' at " + cell_position(row, col));
  }
  return value + 0.0;  // folds -0 into +0
}

std::string csv_quote(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

DepthGrid read_depth_csv(std::string_view bytes) {
  if (bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);

  std::vector<std::string_view> lines;
  while (!bytes.empty()) {
    std::size_t nl = bytes.find('\n');
    std::string_view line = bytes.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    bytes.remove_prefix(nl + 1);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(Errc::kEmptyFile, "depth CSV contains no data");

  std::vector<double> values;
  std::size_t cols = 0;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::string_view line = lines[r];
    std::size_t count = 0;
    while (true) {
      std::size_t comma = line.find(',');
      values.push_back(parse_cell(line.substr(0, comma), r, count));
      ++count;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (r == 0) {
      cols = count;
    } else if (count != cols) {
      throw Error(Errc::kRaggedRows, "row " + std::to_string(r + 1) + " has " +
                                         std::to_string(count) + " values, expected " +
                                         std::to_string(cols));
    }
  }
  return DepthGrid(lines.size(), cols, std::move(values));
}

std::string write_depth_csv(const DepthGrid& depth) {
  std::string out;
  for (std::size_t r = 0; r < depth.rows(); ++r) {
    auto row = depth.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_number(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::span<const std::string_view> feature_columns_2d() { return kColumns2d; }
std::span<const std::string_view> feature_columns_3d() { return kColumns3d; }

std::string write_features_csv(std::span<const FeatureRecord> records) {
  const bool with_3d = !records.empty() && records.front().f3d.has_value();
  for (const auto& rec : records) {
    if (rec.f3d.has_value() != with_3d) {
      throw Error(Errc::kMixedSchemas,
                  "feature records mix 2D-only and 3D schemas");
    }
  }

  auto columns = with_3d ? feature_columns_3d() : feature_columns_2d();
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  out += '\n';

  for (const auto& rec : records) {
    const Features2D& f = rec.f2d;
    out += std::to_string(rec.meta.id);
    out += ',';
    out += csv_quote(rec.meta.label);
    const double fields[] = {rec.meta.score,         f.dorsal_length,
                             f.abdominal_width,      f.area,
                             f.centroid.row,         f.centroid.col,
                             f.bbox_topleft.row,     f.bbox_topleft.col,
                             f.bbox_bottomright.row, f.bbox_bottomright.col,
                             f.rotated_angle_deg};
    for (double v : fields) {
      out += ',';
      out += format_number(v);
    }
    if (with_3d) {
      for (double v : {rec.f3d->height_average_m, rec.f3d->height_centroid_m,
                       rec.f3d->volume}) {
        out += ',';
        out += format_number(v);
      }
    }
    out += '\n';
  }
  return out;
}

std::string format_number(double value) {
  std::array<char, 32> buf{};
  int n = std::snprintf(buf.data(), buf.size(), "%.6g", value + 0.0);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

double round_sig6(double value) {
  if (!std::isfinite(value)) return value;
  return std::strtod(format_number(value).c_str(), nullptr);
}

}  // namespace morphocv
