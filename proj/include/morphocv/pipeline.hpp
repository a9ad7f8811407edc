#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphocv/depth3d.hpp"
#include "morphocv/evaluation.hpp"
#include "morphocv/rendering.hpp"
#include "morphocv/segmentation.hpp"

namespace morphocv {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kMultipleInstancesWarning =
    "multiple instances; largest selected";

enum class Segmenter { kExternal, kThreshold };

Segmenter parse_segmenter(std::string_view name);

struct AnalysisRequest {
  std::optional<DepthGrid> depth;
  std::optional<LabelGrid> labels;
  std::optional<Sidecar> sidecar;
  // Optional RGB photo under the 2D overlay.
  std::optional<RgbImage> image;
  PipelineParams params;
  Segmenter segmenter = Segmenter::kExternal;
  // Its calibration is replaced by params.cal.
  ThresholdParams threshold;
};

struct AnalysisResult {
  std::vector<FeatureRecord> features;
  RgbImage overlay;
  std::optional<SurfaceGrid> surface;
  std::vector<std::string> warnings;
};

// Instances as reported: descending area, then ascending id.
InstanceSet resolve_instances(const AnalysisRequest& request);

AnalysisResult analyze_2d(const AnalysisRequest& request);
// Features for the largest instance only.
AnalysisResult analyze_3d(const AnalysisRequest& request);

// Objects keyed by the feature CSV column names; reals rounded to 6
// significant digits like the CSV.
std::string features_json(const std::vector<FeatureRecord>& records);

// Writes next to the destination then renames over it.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// Output bundle of an analysis: file name -> bytes, all produced before any
// file is written.
struct OutputFile {
  std::string name;
  std::string bytes;
};
std::vector<OutputFile> analysis_outputs(const AnalysisResult& result);
void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files);

// A label PNG plus optional "<stem>.json" sidecar, or a directory of them.
// Pairs are matched by file name; a ground-truth file without a prediction
// counts as an empty prediction.
std::vector<ScenePair> load_scene_pairs(const std::filesystem::path& pred,
                                        const std::filesystem::path& gt,
                                        std::vector<std::string>* warnings = nullptr);

std::vector<double> parse_thresholds(std::string_view list);

}  // namespace morphocv
