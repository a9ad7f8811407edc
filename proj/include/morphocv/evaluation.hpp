#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morphocv/grid.hpp"
#include "morphocv/segmentation.hpp"

namespace morphocv {

struct MatchOutcome {
  std::uint32_t pred_id = 0;
  std::string label;
  double score = 0.0;
  bool is_tp = false;
  // Set only for true positives.
  std::optional<std::uint32_t> matched_gt_id;
  // IoU with the best still-unmatched ground truth of the same label.
  double iou = 0.0;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;

  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

struct PRCurve {
  std::vector<PrPoint> points;
  std::size_t n_gt = 0;
};

struct ApRow {
  std::string label;  // "all" for the macro average across labels
  double threshold = 0.0;
  double ap = 0.0;
  std::size_t n_gt = 0;
  std::size_t n_pred = 0;
};

struct APResult {
  std::vector<ApRow> rows;

  // AP for `label` at `threshold`; the macro row when label is "all", or the
  // only label's row when a single label exists.
  std::optional<double> ap(const std::string& label, double threshold) const;
  // Macro average when several labels exist, else the single label's AP.
  double overall(double threshold) const;
};

struct ScenePair {
  InstanceSet pred;
  InstanceSet gt;
};

inline constexpr double kDefaultIouThresholds[] = {0.5, 0.75};
inline constexpr const char* kMacroLabel = "all";

double mask_iou(const BinaryMask& a, const BinaryMask& b);

// iou[p][g] for preds[p] against gts[g].
using IouTable = std::vector<std::vector<double>>;

// Greedy matching on a precomputed IoU table; see match_instances.
std::vector<MatchOutcome> greedy_match(std::span<const InstanceMeta> preds,
                                       std::span<const InstanceMeta> gts,
                                       const IouTable& iou, double tau);

// Greedy matching in descending score order (ties by ascending id). Each
// prediction takes the unmatched same-label ground truth with the highest
// IoU; it is a true positive iff that IoU >= tau.
std::vector<MatchOutcome> match_instances(const InstanceSet& preds, const InstanceSet& gts,
                                          double tau);

// Running precision and recall down the score-ranked outcomes.
PRCurve pr_curve(std::span<const MatchOutcome> outcomes, std::size_t n_gt);

// Area under the precision envelope: sum of (r_k - r_{k-1}) * max_{j>=k} p_j.
double average_precision(const PRCurve& curve);

// Rankings are pooled across scenes per label.
APResult evaluate(std::span<const ScenePair> scenes,
                  std::span<const double> thresholds = kDefaultIouThresholds);
APResult evaluate(const InstanceSet& preds, const InstanceSet& gts,
                  std::span<const double> thresholds = kDefaultIouThresholds);

// label,threshold,AP,n_gt,n_pred
std::string metrics_csv(const APResult& result);
std::string metrics_json(const APResult& result);

}  // namespace morphocv
