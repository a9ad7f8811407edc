// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: acceptance [path-to-morphocv-cli]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "morphocv/depth3d.hpp"
#include "morphocv/evaluation.hpp"
#include "morphocv/geometry.hpp"
#include "morphocv/pipeline.hpp"
#include "morphocv/raster_io.hpp"
#include "morphocv/rendering.hpp"
#include "test_support.hpp"

using namespace morphocv;
using namespace morphocv::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failure notes for one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int g_failed = 0;

void run(const std::string& name, const std::function<std::string(Check&)>& body) {
  Check c;
  std::string detail;
  try {
    detail = body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  if (c.failures.empty()) {
    std::cout << "PASS " << name << (detail.empty() ? "" : ": " + detail) << "\n";
  } else {
    ++g_failed;
    std::cout << "FAIL " << name << ": " << c.failures.front();
    if (c.failures.size() > 1) std::cout << " (+" << c.failures.size() - 1 << " more)";
    std::cout << "\n";
  }
}

double angle_gap_mod180(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 180.0);
  return std::min(d, 180.0 - d);
}

BinaryMask shifted(const BinaryMask& m, std::size_t dr, std::size_t dc) {
  BinaryMask out(m.rows() + dr, m.cols() + dc);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r + dr, c + dc) = m(r, c);
  return out;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string plateau_volumetry(Check& c) {
  const auto t0 = Clock::now();
  const DepthGrid scene = plateau_scene();
  const BinaryMask mask = block_mask(20, 20, 5, 5, 10, 10);
  PipelineParams params;
  const Features3D f = *features_3d(scene, mask, {}, params).f3d;
  c.expect(std::abs(f.height_average_m - 1.0) <= 1e-9, fmt("Height_average %.17g", f.height_average_m));
  c.expect(std::abs(f.height_centroid_m - 1.0) <= 1e-9, fmt("Height_centroid %.17g", f.height_centroid_m));
  c.expect(std::abs(f.volume - 100.0) <= 1e-9, fmt("Volume %.17g", f.volume));
  params.cal.ppm = 100.0;
  const double v100 = features_3d(scene, mask, {}, params).f3d->volume;
  c.expect(std::abs(v100 - 0.01) <= 1e-9, fmt("Volume at ppm 100 %.17g", v100));
  const double secs = seconds_since(t0);
  c.expect(secs < 1.0, fmt("took %.3f s", secs));
  return fmt("volume %.9g, %.9g at ppm 100, %.4f s", f.volume, v100, secs);
}

std::string rotated_rectangles(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937 rng(20240601);
  std::uniform_real_distribution<double> side(8.0, 60.0), angle(0.0, 180.0);
  double worst_ratio = 0, worst_len = 0, worst_ang = 0;
  for (int i = 0; i < 50; ++i) {
    double a = side(rng), b = side(rng);
    const double length = std::max(a, b), width = std::min(a, b);
    const double theta = angle(rng);
    const BinaryMask m = rasterized_rect(80, 80, {40, 40}, length, width, theta);
    const RotatedBox box = min_rotated_rect(m);
    const SweepResult oracle = sweep_oracle(all_pixel_corners(m));
    const double ratio = box.length * box.width / oracle.area;
    const double dl = std::max(std::abs(box.length - length), std::abs(box.width - width));
    worst_ratio = std::max(worst_ratio, ratio);
    worst_len = std::max(worst_len, dl);
    c.expect(ratio <= 1.005, fmt("#%d area ratio %.5f", i, ratio));
    c.expect(dl <= 1.5, fmt("#%d L=%.2f W=%.2f got %.2f x %.2f", i, length, width, box.length, box.width));
    // orientation of the long side is undefined when the sides are equal
    if (length - width > 1.5) {
      const double da = angle_gap_mod180(box.angle_deg, theta);
      worst_ang = std::max(worst_ang, da);
      c.expect(da <= 2.0, fmt("#%d theta %.2f got %.2f (L=%.2f W=%.2f); sweep minimum %.2f at %.1f deg",
                              i, theta, box.angle_deg, length, width, oracle.area, oracle.angle_deg));
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 10.0, fmt("took %.2f s", secs));
  return fmt("max area ratio %.5f, max side error %.3f px, max angle error %.3f deg, %.2f s",
             worst_ratio, worst_len, worst_ang, secs);
}

std::string gaussian_oracle(Check& c) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  double worst = 0;
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (int i = 0; i < 20; ++i) {
      DepthGrid g(32, 32);
      for (double& v : g.values()) v = u(rng);
      const DepthGrid fast = gaussian_filter(g, sigma), slow = naive_gaussian_2d(g, sigma);
      for (std::size_t k = 0; k < g.size(); ++k)
        worst = std::max(worst, std::abs(fast.values()[k] - slow.values()[k]));
    }
    const DepthGrid flat(32, 32, u(rng));
    const DepthGrid out = gaussian_filter(flat, sigma);
    for (std::size_t k = 0; k < flat.size(); ++k) {
      c.expect(std::abs(out.values()[k] - flat.values()[k]) < 1e-12,
               fmt("constant grid moved at sigma %.1f", sigma));
    }
  }
  c.expect(worst < 1e-12, fmt("max abs diff %.3g", worst));
  return fmt("max abs diff %.3g", worst);
}

std::string ap_fixtures(Check& c) {
  LabelGrid gt_labels(20, 20);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) gt_labels(i, j) = 1;
  const InstanceSet gt{gt_labels, {{1, "pig", 1.0}}};

  const APResult perfect = evaluate(gt, gt);
  c.expect(perfect.overall(0.5) == 1.0 && perfect.overall(0.75) == 1.0, "perfect match");

  // right half shifted down 5 rows: inter 75, union 125
  LabelGrid p(20, 20);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) p(i + (j < 5 ? 0 : 5), j) = 1;
  const InstanceSet pred{p, {{1, "pig", 0.7}}};
  c.expect(std::abs(mask_iou(pred.mask(1), gt.mask(1)) - 0.6) < 1e-15, "fixture IoU is not 0.6");
  const APResult partial = evaluate(pred, gt);
  c.expect(partial.overall(0.5) == 1.0, fmt("IoU 0.6 AP@0.5 %.17g", partial.overall(0.5)));
  c.expect(partial.overall(0.75) == 0.0, fmt("IoU 0.6 AP@0.75 %.17g", partial.overall(0.75)));

  MatchOutcome fp, tp;
  fp.score = 0.9;
  tp.score = 0.8;
  tp.is_tp = true;
  const std::vector<MatchOutcome> ranked{fp, tp};
  const double fp_tp = average_precision(pr_curve(ranked, 1));
  c.expect(fp_tp == 0.5, fmt("[FP,TP] AP %.17g", fp_tp));

  const double env = average_precision(PRCurve{{{0.5, 1.0}, {1.0, 0.5}}, 2});
  c.expect(env == 0.75, fmt("envelope AP %.17g", env));
  return "";
}

std::string mean_fill(Check& c) {
  const DepthGrid scene = plateau_scene();
  const BinaryMask mask = block_mask(20, 20, 5, 5, 10, 10);
  const FeatureRecord reference = features_3d(scene, mask, {}, {});
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask.values()[i]) inside.push_back(i);
  std::mt19937 rng(11);
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    DepthGrid holes = scene;
    std::shuffle(inside.begin(), inside.end(), rng);
    for (std::size_t k = 0; k < inside.size() / 10; ++k) holes.values()[inside[k]] = 0.0;
    const FeatureRecord got = features_3d(holes, mask, {}, {});
    c.expect(got == reference, fmt("trial %d changed a feature", t));
  }
  return fmt("%d trials", trials);
}

std::string cli_end_to_end(Check& c, const std::string& cli) {
  c.expect(!cli.empty() && fs::exists(cli), "CLI binary not found: " + cli);
  if (!c.failures.empty()) return "";

  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("morphocv-accept-" + std::to_string(rd()));
  fs::create_directories(dir);
  const DepthGrid scene = plateau_scene();
  write_file_atomic(dir / "plateau.csv", write_depth_csv(scene));

  const std::string cmd = "\"" + cli + "\" analyze-3d --depth \"" + (dir / "plateau.csv").string() +
                          "\" --segmenter threshold --out \"" + (dir / "out").string() +
                          "\" > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  c.expect(status == 0, fmt("CLI exit status %d", status));
  if (status != 0) return "";

  const std::string csv = read_file(dir / "out" / "features.csv");
  const std::string header =
      "id,label,score,Dorsal_length,Abdominal_width,Area,Centroid_x,Centroid_y,"
      "bbox_topleft_x,bbox_topleft_y,bbox_bottomright_x,bbox_bottomright_y,"
      "bbox_rotatedangle,Height_average,Height_centroid,Volume";
  const std::string first_line = csv.substr(0, csv.find('\n'));
  c.expect(first_line == header, "header differs: " + first_line);

  AnalysisRequest req;
  req.depth = read_depth_csv(read_file(dir / "plateau.csv"));
  req.segmenter = Segmenter::kThreshold;
  const AnalysisResult lib = analyze_3d(req);
  c.expect(csv == write_features_csv(lib.features), "CSV bytes differ from the library output");

  const std::string row = csv.substr(first_line.size() + 1, csv.find('\n', first_line.size() + 1) -
                                                              first_line.size() - 1);
  const auto cells = split(row);
  c.expect(cells.size() == 16, fmt("row has %zu columns", cells.size()));
  if (cells.size() == 16) {
    const FeatureRecord& r = lib.features.front();
    const double expected[] = {r.meta.score, r.f2d.dorsal_length, r.f2d.abdominal_width,
                               r.f2d.area, r.f2d.centroid.row, r.f2d.centroid.col,
                               r.f2d.bbox_topleft.row, r.f2d.bbox_topleft.col,
                               r.f2d.bbox_bottomright.row, r.f2d.bbox_bottomright.col,
                               r.f2d.rotated_angle_deg, r.f3d->height_average_m,
                               r.f3d->height_centroid_m, r.f3d->volume};
    for (std::size_t k = 0; k < std::size(expected); ++k) {
      const double got = std::strtod(cells[k + 2].c_str(), nullptr);
      c.expect(same_bits(got, round_sig6(expected[k])), "column " + std::to_string(k + 2) + " differs");
    }
    c.expect(cells[15] == "100", "Volume cell " + cells[15]);
  }

  const RgbImage overlay = decode_png(read_file(dir / "out" / "overlay.png"));
  c.expect(overlay == lib.overlay, "overlay PNG does not decode to the library image");

  std::error_code ec;
  fs::remove_all(dir, ec);
  return "16 columns, bytes identical, overlay round-trips";
}

std::string metamorphic(Check& c) {
  std::mt19937 rng(5150);
  std::uniform_int_distribution<std::size_t> offset(1, 25);

  // translation equivariance of the 2D features
  for (int t = 0; t < 40; ++t) {
    const BinaryMask m = random_blob(rng, 40, 40);
    const std::size_t dr = offset(rng), dc = offset(rng);
    const Features2D a = features_2d(m, {}, {}).f2d;
    const Features2D b = features_2d(shifted(m, dr, dc), {}, {}).f2d;
    const double r = static_cast<double>(dr), q = static_cast<double>(dc);
    const double tol = 1e-9;
    c.expect(std::abs(a.dorsal_length - b.dorsal_length) <= tol, fmt("translation #%d length", t));
    c.expect(std::abs(a.abdominal_width - b.abdominal_width) <= tol, fmt("translation #%d width", t));
    c.expect(a.area == b.area, fmt("translation #%d area", t));
    c.expect(angle_gap_mod180(a.rotated_angle_deg, b.rotated_angle_deg) <= tol,
             fmt("translation #%d angle", t));
    c.expect(std::abs(a.centroid.row + r - b.centroid.row) <= tol &&
                 std::abs(a.centroid.col + q - b.centroid.col) <= tol,
             fmt("translation #%d centroid", t));
    c.expect(std::abs(a.bbox_topleft.row + r - b.bbox_topleft.row) <= tol &&
                 std::abs(a.bbox_topleft.col + q - b.bbox_topleft.col) <= tol &&
                 std::abs(a.bbox_bottomright.row + r - b.bbox_bottomright.row) <= tol &&
                 std::abs(a.bbox_bottomright.col + q - b.bbox_bottomright.col) <= tol,
             fmt("translation #%d box corners", t));
  }

  // ppm scaling law
  for (int t = 0; t < 20; ++t) {
    const BinaryMask m = random_blob(rng, 40, 40);
    const Features2D px = features_2d(m, {}, {}).f2d;
    for (double k : {2.0, 10.0, 100.0, 37.5}) {
      const Features2D s = features_2d(m, {}, Calibration{k, 2.5}).f2d;
      const auto rel = [](double got, double want) {
        return std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want));
      };
      c.expect(rel(s.dorsal_length, px.dorsal_length / k) && rel(s.abdominal_width, px.abdominal_width / k) &&
                   rel(s.centroid.row, px.centroid.row / k) && rel(s.bbox_bottomright.col, px.bbox_bottomright.col / k),
               fmt("ppm %.1f lengths", k));
      c.expect(rel(s.area, px.area / (k * k)), fmt("ppm %.1f area", k));
      c.expect(s.rotated_angle_deg == px.rotated_angle_deg, fmt("ppm %.1f angle", k));
    }
  }

  // AP invariance under strictly increasing score maps
  std::uniform_int_distribution<std::size_t> pos(0, 28), size(4, 12);
  std::uniform_int_distribution<int> jitter(-3, 3), count(1, 5);
  std::uniform_real_distribution<double> score(0.01, 1.0);
  for (int t = 0; t < 40; ++t) {
    LabelGrid g(40, 40), p(40, 40);
    std::vector<InstanceMeta> gm, pm;
    const int n = count(rng);
    for (int k = 1; k <= n; ++k) {
      const std::size_t r0 = pos(rng), c0 = pos(rng), h = size(rng), w = size(rng);
      const auto jr = static_cast<std::size_t>(std::clamp<long>(static_cast<long>(r0) + jitter(rng), 0, 28));
      const auto jc = static_cast<std::size_t>(std::clamp<long>(static_cast<long>(c0) + jitter(rng), 0, 28));
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          g(r0 + i, c0 + j) = static_cast<std::uint32_t>(k);
          p(jr + i, jc + j) = static_cast<std::uint32_t>(k);
        }
    }
    for (int k = 1; k <= n; ++k) {
      const auto id = static_cast<std::uint32_t>(k);
      if (popcount(mask_of(g, id))) gm.push_back({id, "pig", 1.0});
      if (popcount(mask_of(p, id))) pm.push_back({id, "pig", score(rng)});
    }
    if (gm.empty()) continue;
    const InstanceSet gt{g, gm};
    InstanceSet pred{p, pm};
    const APResult before = evaluate(pred, gt);
    for (auto& m : pred.metas) m.score = std::exp(3.0 * m.score) / 100.0;
    const APResult after = evaluate(pred, gt);
    for (double tau : kDefaultIouThresholds) {
      c.expect(after.overall(tau) == before.overall(tau), fmt("AP changed at scene %d", t));
    }
  }
  return "translation, ppm scaling, score maps";
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = argc > 1 ? argv[1] : "";
#ifdef MORPHOCV_CLI_PATH
  if (cli.empty()) cli = MORPHOCV_CLI_PATH;
#endif

  run("plateau volumetry", plateau_volumetry);
  run("rotated rectangle oracle", rotated_rectangles);
  run("gaussian oracle", gaussian_oracle);
  run("AP fixtures", ap_fixtures);
  run("mean-fill robustness", mean_fill);
  run("end-to-end CLI", [&](Check& c) { return cli_end_to_end(c, cli); });
  run("metamorphic suite", metamorphic);

  std::cout << (g_failed ? std::to_string(g_failed) + " criteria failed" : "all criteria passed") << "\n";
  return g_failed ? 1 : 0;
}
