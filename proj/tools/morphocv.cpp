// Command-line front end: 2D/3D analysis, evaluation, heatmap rendering and
// the HTTP service.

#include <pthread.h>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "morphocv/pipeline.hpp"
#include "morphocv/raster_io.hpp"
#include "morphocv/service.hpp"

namespace {

using namespace morphocv;
namespace fs = std::filesystem;

struct AnalyzeOptions {
  std::string depth;
  std::string labels;
  std::string sidecar;
  std::string image;
  std::string segmenter;
  double ppm = 1.0;
  double camera_distance = 2.5;
  double sigma = 0.0;
  double min_height = 0.05;
  std::size_t min_area = 25;
  std::string out;
};

AnalysisRequest build_request(const AnalyzeOptions& o) {
  AnalysisRequest r;
  if (!o.depth.empty()) r.depth = read_depth_csv(read_file(o.depth));
  if (!o.labels.empty()) r.labels = read_label_png(read_file(o.labels));
  if (!o.sidecar.empty()) r.sidecar = parse_sidecar(read_file(o.sidecar));
  if (!o.image.empty()) r.image = decode_png(read_file(o.image));
  r.params.cal = {o.ppm, o.camera_distance};
  r.params.sigma = o.sigma;
  r.threshold.min_height_m = o.min_height;
  r.threshold.min_area_px = o.min_area;
  if (!o.segmenter.empty()) {
    r.segmenter = parse_segmenter(o.segmenter);
  } else {
    r.segmenter = r.labels ? Segmenter::kExternal : Segmenter::kThreshold;
  }
  return r;
}

void report(const AnalysisResult& result, const std::string& out) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << result.features.size() << " feature row(s) to "
            << (fs::path(out) / "features.csv").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morphometric analysis of segmented animals in images and depth maps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  AnalyzeOptions a2;
  auto* cmd2 = app.add_subcommand("analyze-2d", "2D features and overlay from a label mask");
  cmd2->add_option("--labels", a2.labels, "label PNG (pixel value = instance id)")->required();
  cmd2->add_option("--sidecar", a2.sidecar, "JSON sidecar with labels and scores");
  cmd2->add_option("--image", a2.image, "RGB PNG to draw the overlay on");
  cmd2->add_option("--ppm", a2.ppm, "pixels per meter")->capture_default_str();
  cmd2->add_option("--out", a2.out, "output directory")->required();

  AnalyzeOptions a3;
  auto* cmd3 = app.add_subcommand("analyze-3d", "3D features and surface from a depth CSV");
  cmd3->add_option("--depth", a3.depth, "depth map CSV in meters")->required();
  auto* labels3 = cmd3->add_option("--labels", a3.labels, "label PNG");
  cmd3->add_option("--sidecar", a3.sidecar, "JSON sidecar with labels and scores");
  cmd3->add_option("--segmenter", a3.segmenter, "external or threshold")
      ->check(CLI::IsMember({"external", "threshold"}))
      ->excludes(labels3);
  cmd3->add_option("--min-height", a3.min_height, "threshold segmenter: meters above ground")
      ->capture_default_str();
  cmd3->add_option("--min-area", a3.min_area, "threshold segmenter: minimum pixels")
      ->capture_default_str();
  cmd3->add_option("--ppm", a3.ppm, "pixels per meter")->capture_default_str();
  cmd3->add_option("--camera-distance", a3.camera_distance, "camera to ground, meters")
      ->capture_default_str();
  cmd3->add_option("--sigma", a3.sigma, "Gaussian sigma in pixels")->capture_default_str();
  cmd3->add_option("--out", a3.out, "output directory")->required();

  std::string pred, gt, iou = "0.5,0.75", eval_out;
  auto* cmde = app.add_subcommand("evaluate", "AP of predicted masks against ground truth");
  cmde->add_option("--pred", pred, "prediction label PNG or directory")->required();
  cmde->add_option("--gt", gt, "ground-truth label PNG or directory")->required();
  cmde->add_option("--iou", iou, "comma-separated IoU thresholds")->capture_default_str();
  cmde->add_option("--out", eval_out, "output directory")->required();

  std::string render_depth, render_out;
  auto* cmdr = app.add_subcommand("render", "depth CSV to heatmap PNG");
  cmdr->add_option("--depth", render_depth, "depth map CSV")->required();
  cmdr->add_option("--out", render_out, "output PNG path")->required();

  ServiceConfig svc;
  std::string assets, results;
  auto* cmds = app.add_subcommand("serve", "run the HTTP service");
  cmds->add_option("--port", svc.port, "listening port")
      ->envname("MORPHOCV_PORT")
      ->capture_default_str();
  cmds->add_option("--host", svc.host, "listening address")->capture_default_str();
  cmds->add_option("--assets", assets, "static UI directory");
  cmds->add_option("--results", results, "directory for rendered results");
  cmds->add_option("--max-upload-mb", svc.max_upload_mb, "request size cap in MiB")
      ->envname("MORPHOCV_MAX_UPLOAD_MB")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd2) {
      const AnalysisResult result = analyze_2d(build_request(a2));
      write_outputs(a2.out, analysis_outputs(result));
      report(result, a2.out);
    } else if (*cmd3) {
      const AnalysisResult result = analyze_3d(build_request(a3));
      write_outputs(a3.out, analysis_outputs(result));
      report(result, a3.out);
    } else if (*cmde) {
      std::vector<std::string> warnings;
      const auto thresholds = parse_thresholds(iou);
      const auto scenes = load_scene_pairs(pred, gt, &warnings);
      const APResult result = evaluate(scenes, thresholds);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      write_outputs(eval_out, {{"metrics.csv", metrics_csv(result)},
                               {"metrics.json", metrics_json(result)}});
      std::cout << metrics_csv(result);
    } else if (*cmdr) {
      const RgbImage img = depth_to_heatmap(read_depth_csv(read_file(render_depth)));
      const std::string png = encode_png(img);
      write_file_atomic(render_out, png);
    } else if (*cmds) {
      svc.assets_dir = assets;
      svc.results_dir = results;
      Service service(svc);
      const int port = service.bind();
      // Worker threads inherit the mask; only this thread takes the signals.
      sigset_t stop_signals;
      sigemptyset(&stop_signals);
      sigaddset(&stop_signals, SIGINT);
      sigaddset(&stop_signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
      std::cout << "listening on http://" << svc.host << ":" << port << std::endl;
      std::thread server([&service] { service.run(); });
      int sig = 0;
      sigwait(&stop_signals, &sig);
      service.stop();
      server.join();
    }
  } catch (const Error& e) {
    std::cerr << "error " << e.code_name() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error E_INTERNAL: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
