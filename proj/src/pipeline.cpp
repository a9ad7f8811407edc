#include "morphocv/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "morphocv/geometry.hpp"
#include "morphocv/raster_io.hpp"

namespace morphocv {
namespace {

namespace fs = std::filesystem;

std::vector<RotatedBox> boxes_for(const InstanceSet& set) {
  std::vector<RotatedBox> boxes;
  boxes.reserve(set.metas.size());
  for (const auto& m : set.metas) boxes.push_back(min_rotated_rect(set.mask(m.id)));
  return boxes;
}

std::optional<Sidecar> sidecar_beside(const fs::path& png) {
  fs::path json = png;
  json.replace_extension(".json");
  if (!fs::exists(json)) return std::nullopt;
  return parse_sidecar(read_file(json));
}

InstanceSet load_labeled(const fs::path& png) {
  return load_external(read_label_png(read_file(png)), sidecar_beside(png));
}

}  // namespace

Segmenter parse_segmenter(std::string_view name) {
  if (name == "external") return Segmenter::kExternal;
  if (name == "threshold") return Segmenter::kThreshold;
  throw Error(Errc::kInvalidArgument,
              "unknown segmenter '" + std::string(name) + "' (expected external or threshold)");
}

InstanceSet resolve_instances(const AnalysisRequest& request) {
  request.params.validate();
  InstanceSet set;
  if (request.segmenter == Segmenter::kThreshold) {
    if (!request.depth) {
      throw Error(Errc::kInvalidArgument, "the threshold segmenter needs a depth map");
    }
    ThresholdParams tp = request.threshold;
    tp.cal = request.params.cal;
    set = segment_depth_threshold(*request.depth, tp);
  } else {
    if (!request.labels) {
      throw Error(Errc::kInvalidArgument, "the external segmenter needs a label mask");
    }
    if (request.depth) {
      require_same_shape(*request.depth, *request.labels,
                         "depth map and label mask dimensions differ");
    }
    set = load_external(*request.labels, request.sidecar);
  }
  if (set.metas.empty()) throw Error(Errc::kNoInstances, "no instances found");
  return sorted_by_area(std::move(set));
}

AnalysisResult analyze_2d(const AnalysisRequest& request) {
  const InstanceSet set = resolve_instances(request);

  RgbImage base;
  if (request.image) {
    require_same_shape(*request.image, set.labels, "image and label mask dimensions differ");
    base = *request.image;
  } else if (request.depth) {
    base = depth_to_heatmap(*request.depth);
  } else {
    base = RgbImage(set.labels.rows(), set.labels.cols());
  }

  AnalysisResult result;
  for (const auto& meta : set.metas) {
    result.features.push_back(features_2d(set.mask(meta.id), meta, request.params.cal));
  }
  result.overlay = render_overlay(base, set, boxes_for(set));
  return result;
}

AnalysisResult analyze_3d(const AnalysisRequest& request) {
  if (!request.depth) throw Error(Errc::kInvalidArgument, "3D analysis needs a depth map");
  const InstanceSet all = resolve_instances(request);

  AnalysisResult result;
  if (all.metas.size() > 1) result.warnings.emplace_back(kMultipleInstancesWarning);

  InstanceSet selected{all.labels, {all.metas.front()}};
  const BinaryMask mask = selected.mask(selected.metas.front().id);
  result.features.push_back(
      features_3d(*request.depth, mask, selected.metas.front(), request.params));
  result.surface = surface_export(*request.depth, mask, request.params);
  result.overlay =
      render_overlay(depth_to_heatmap(*request.depth), selected, boxes_for(selected));
  return result;
}

std::string features_json(const std::vector<FeatureRecord>& records) {
  auto columns = records.empty() || !records.front().f3d ? feature_columns_2d()
                                                         : feature_columns_3d();
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& rec : records) {
    const Features2D& f = rec.f2d;
    std::vector<double> reals = {rec.meta.score,         f.dorsal_length,
                                 f.abdominal_width,      f.area,
                                 f.centroid.row,         f.centroid.col,
                                 f.bbox_topleft.row,     f.bbox_topleft.col,
                                 f.bbox_bottomright.row, f.bbox_bottomright.col,
                                 f.rotated_angle_deg};
    if (rec.f3d) {
      reals.insert(reals.end(),
                   {rec.f3d->height_average_m, rec.f3d->height_centroid_m, rec.f3d->volume});
    }
    if (reals.size() + 2 != columns.size()) {
      throw Error(Errc::kMixedSchemas, "feature records mix 2D-only and 3D schemas");
    }
    nlohmann::ordered_json obj;
    obj[std::string(columns[0])] = rec.meta.id;
    obj[std::string(columns[1])] = rec.meta.label;
    for (std::size_t i = 0; i < reals.size(); ++i) {
      obj[std::string(columns[i + 2])] = round_sig6(reals[i]);
    }
    list.push_back(std::move(obj));
  }
  return list.dump();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(Errc::kIo, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::kIo, "cannot rename into " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<OutputFile> analysis_outputs(const AnalysisResult& result) {
  std::vector<OutputFile> files;
  files.push_back({"features.csv", write_features_csv(result.features)});
  files.push_back({"overlay.png", encode_png(result.overlay)});
  if (result.surface) files.push_back({"surface.json", surface_to_json(*result.surface)});
  return files;
}

void write_outputs(const fs::path& dir, const std::vector<OutputFile>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::kIo, "cannot create output directory " + dir.string());
  for (const auto& f : files) write_file_atomic(dir / f.name, f.bytes);
}

std::vector<ScenePair> load_scene_pairs(const fs::path& pred, const fs::path& gt,
                                        std::vector<std::string>* warnings) {
  std::vector<ScenePair> scenes;
  if (!fs::is_directory(gt)) {
    if (fs::is_directory(pred)) {
      throw Error(Errc::kInvalidArgument, "--pred and --gt must both be files or directories");
    }
    scenes.push_back({load_labeled(pred), load_labeled(gt)});
    return scenes;
  }
  if (!fs::is_directory(pred)) {
    throw Error(Errc::kInvalidArgument, "--pred and --gt must both be files or directories");
  }

  std::vector<fs::path> gt_files;
  for (const auto& entry : fs::directory_iterator(gt)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      gt_files.push_back(entry.path());
    }
  }
  std::sort(gt_files.begin(), gt_files.end());
  for (const auto& g : gt_files) {
    InstanceSet gt_set = load_labeled(g);
    const fs::path p = pred / g.filename();
    if (fs::exists(p)) {
      scenes.push_back({load_labeled(p), std::move(gt_set)});
    } else {
      if (warnings) warnings->push_back("no prediction for " + g.filename().string());
      InstanceSet empty{LabelGrid(gt_set.labels.rows(), gt_set.labels.cols()), {}};
      scenes.push_back({std::move(empty), std::move(gt_set)});
    }
  }
  if (warnings) {
    for (const auto& entry : fs::directory_iterator(pred)) {
      if (entry.path().extension() == ".png" && !fs::exists(gt / entry.path().filename())) {
        warnings->push_back("prediction without ground truth ignored: " +
                            entry.path().filename().string());
      }
    }
  }
  return scenes;
}

std::vector<double> parse_thresholds(std::string_view list) {
  std::vector<double> out;
  while (true) {
    const std::size_t comma = list.find(',');
    std::string_view tok = list.substr(0, comma);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    double v = 0.0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || end != tok.data() + tok.size() ||
        !(v > 0.0 && v <= 1.0)) {
      throw Error(Errc::kInvalidArgument,
                  "IoU thresholds must be comma-separated values in (0, 1]");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (out.empty()) throw Error(Errc::kInvalidArgument, "no IoU thresholds given");
  return out;
}

}  // namespace morphocv
