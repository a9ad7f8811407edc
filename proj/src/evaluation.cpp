#include "morphocv/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "morphocv/raster_io.hpp"

namespace morphocv {
namespace {

void check_threshold(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "IoU threshold must lie in (0, 1]");
  }
}

std::map<std::uint32_t, std::size_t> areas_by_id(const LabelGrid& labels) {
  std::map<std::uint32_t, std::size_t> out;
  for (std::uint32_t v : labels.values()) {
    if (v) ++out[v];
  }
  return out;
}

}  // namespace

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask dimensions differ");
  std::size_t inter = 0, uni = 0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const bool x = av[i] != 0;
    const bool y = bv[i] != 0;
    inter += x && y;
    uni += x || y;
  }
  if (uni == 0) throw Error(Errc::kBothEmpty, "IoU of two empty masks is undefined");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<MatchOutcome> greedy_match(std::span<const InstanceMeta> preds,
                                       std::span<const InstanceMeta> gts,
                                       const IouTable& iou, double tau) {
  check_threshold(tau);
  if (iou.size() != preds.size()) {
    throw Error(Errc::kDimensionMismatch, "IoU table rows must match predictions");
  }
  for (const auto& row : iou) {
    if (row.size() != gts.size()) {
      throw Error(Errc::kDimensionMismatch, "IoU table columns must match ground truth");
    }
  }

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
    return preds[a].id < preds[b].id;
  });
  // Equal IoUs go to the lower ground-truth id.
  std::vector<std::size_t> gt_order(gts.size());
  std::iota(gt_order.begin(), gt_order.end(), std::size_t{0});
  std::sort(gt_order.begin(), gt_order.end(),
            [&](std::size_t a, std::size_t b) { return gts[a].id < gts[b].id; });

  std::vector<bool> used(gts.size(), false);
  std::vector<MatchOutcome> outcomes;
  outcomes.reserve(order.size());
  for (std::size_t p : order) {
    MatchOutcome out;
    out.pred_id = preds[p].id;
    out.label = preds[p].label;
    out.score = preds[p].score;
    std::optional<std::size_t> best;
    for (std::size_t g : gt_order) {
      if (used[g] || gts[g].label != preds[p].label) continue;
      if (!best || iou[p][g] > out.iou) {
        best = g;
        out.iou = iou[p][g];
      }
    }
    if (best && out.iou >= tau) {
      used[*best] = true;
      out.is_tp = true;
      out.matched_gt_id = gts[*best].id;
    }
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

std::vector<MatchOutcome> match_instances(const InstanceSet& preds, const InstanceSet& gts,
                                          double tau) {
  check_threshold(tau);
  require_same_shape(preds.labels, gts.labels, "prediction and ground-truth dimensions differ");

  const auto pred_area = areas_by_id(preds.labels);
  const auto gt_area = areas_by_id(gts.labels);
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> overlap;
  auto pv = preds.labels.values();
  auto gv = gts.labels.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (pv[i] && gv[i]) ++overlap[{pv[i], gv[i]}];
  }

  // Instances without pixels cannot be matched or scored.
  std::vector<InstanceMeta> p_list, g_list;
  for (const auto& m : preds.metas) {
    if (pred_area.contains(m.id)) p_list.push_back(m);
  }
  for (const auto& m : gts.metas) {
    if (gt_area.contains(m.id)) g_list.push_back(m);
  }

  IouTable table(p_list.size(), std::vector<double>(g_list.size(), 0.0));
  for (std::size_t p = 0; p < p_list.size(); ++p) {
    for (std::size_t g = 0; g < g_list.size(); ++g) {
      auto it = overlap.find({p_list[p].id, g_list[g].id});
      const std::size_t inter = it == overlap.end() ? 0 : it->second;
      const std::size_t uni = pred_area.at(p_list[p].id) + gt_area.at(g_list[g].id) - inter;
      table[p][g] = static_cast<double>(inter) / static_cast<double>(uni);
    }
  }
  return greedy_match(p_list, g_list, table, tau);
}

PRCurve pr_curve(std::span<const MatchOutcome> outcomes, std::size_t n_gt) {
  if (n_gt == 0) throw Error(Errc::kNoGroundTruth, "precision-recall needs ground truth");
  std::vector<MatchOutcome> ranked(outcomes.begin(), outcomes.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const MatchOutcome& a, const MatchOutcome& b) { return a.score > b.score; });

  PRCurve curve;
  curve.n_gt = n_gt;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    tp += ranked[k].is_tp;
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(n_gt),
                            static_cast<double>(tp) / static_cast<double>(k + 1)});
  }
  return curve;
}

double average_precision(const PRCurve& curve) {
  const auto& pts = curve.points;
  std::vector<double> envelope(pts.size());
  double running = 0.0;
  for (std::size_t k = pts.size(); k-- > 0;) {
    running = std::max(running, pts[k].precision);
    envelope[k] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    ap += (pts[k].recall - prev_recall) * envelope[k];
    prev_recall = pts[k].recall;
  }
  return ap;
}

std::optional<double> APResult::ap(const std::string& label, double threshold) const {
  for (const auto& row : rows) {
    if (row.label == label && row.threshold == threshold) return row.ap;
  }
  return std::nullopt;
}

double APResult::overall(double threshold) const {
  if (auto macro = ap(kMacroLabel, threshold)) return *macro;
  for (const auto& row : rows) {
    if (row.threshold == threshold) return row.ap;
  }
  return 0.0;
}

APResult evaluate(std::span<const ScenePair> scenes, std::span<const double> thresholds) {
  for (double t : thresholds) check_threshold(t);

  std::set<std::string> labels;
  std::map<std::string, std::size_t> n_gt, n_pred;
  for (const auto& scene : scenes) {
    require_same_shape(scene.pred.labels, scene.gt.labels,
                       "prediction and ground-truth dimensions differ");
    for (const auto& m : scene.gt.metas) {
      labels.insert(m.label);
      ++n_gt[m.label];
    }
    for (const auto& m : scene.pred.metas) {
      labels.insert(m.label);
      ++n_pred[m.label];
    }
  }

  APResult result;
  for (double tau : thresholds) {
    // Scene order, then score order within a scene; pr_curve's stable sort
    // on score keeps (scene, id) as the tie order.
    std::map<std::string, std::vector<MatchOutcome>> pooled;
    for (const auto& scene : scenes) {
      for (auto& m : match_instances(scene.pred, scene.gt, tau)) {
        std::string label = m.label;
        pooled[label].push_back(std::move(m));
      }
    }

    double macro_sum = 0.0;
    std::size_t macro_count = 0;
    for (const auto& label : labels) {
      ApRow row{.label = label, .threshold = tau, .n_gt = n_gt[label], .n_pred = n_pred[label]};
      if (row.n_gt > 0) {
        row.ap = average_precision(pr_curve(pooled[label], row.n_gt));
        macro_sum += row.ap;
        ++macro_count;
      }
      result.rows.push_back(row);
    }
    if (labels.size() > 1) {
      std::size_t gt_total = 0, pred_total = 0;
      for (const auto& l : labels) {
        gt_total += n_gt[l];
        pred_total += n_pred[l];
      }
      result.rows.push_back(ApRow{
          .label = kMacroLabel,
          .threshold = tau,
          .ap = macro_count ? macro_sum / static_cast<double>(macro_count) : 0.0,
          .n_gt = gt_total,
          .n_pred = pred_total,
      });
    }
  }
  return result;
}

APResult evaluate(const InstanceSet& preds, const InstanceSet& gts,
                  std::span<const double> thresholds) {
  const ScenePair scene{preds, gts};
  return evaluate(std::span<const ScenePair>(&scene, 1), thresholds);
}

std::string metrics_csv(const APResult& result) {
  std::string out = "label,threshold,AP,n_gt,n_pred\n";
  for (const auto& row : result.rows) {
    std::string label = row.label;
    if (label.find_first_of(",\"\r\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char ch : label) {
        if (ch == '"') quoted += '"';
        quoted += ch;
      }
      label = quoted + "\"";
    }
    out += label + "," + format_number(row.threshold) + "," + format_number(row.ap) + "," +
           std::to_string(row.n_gt) + "," + std::to_string(row.n_pred) + "\n";
  }
  return out;
}

std::string metrics_json(const APResult& result) {
  nlohmann::ordered_json doc;
  auto& rows = doc["metrics"] = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) {
    rows.push_back({{"label", row.label},
                    {"threshold", round_sig6(row.threshold)},
                    {"AP", round_sig6(row.ap)},
                    {"n_gt", row.n_gt},
                    {"n_pred", row.n_pred}});
  }
  return doc.dump();
}

}  // namespace morphocv
