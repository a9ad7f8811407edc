#include "morphocv/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <numeric>

#include "json.hpp"
#include "morphocv/geometry.hpp"

namespace morphocv {

std::vector<std::size_t> InstanceSet::areas() const {
  std::map<std::uint32_t, std::size_t> counts;
  for (std::uint32_t v : labels.values()) {
    if (v) ++counts[v];
  }
  std::vector<std::size_t> out;
  out.reserve(metas.size());
  for (const auto& m : metas) out.push_back(counts.contains(m.id) ? counts[m.id] : 0);
  return out;
}

Sidecar parse_sidecar(std::string_view json_text) {
  using nlohmann::json;
  const json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::kBadSidecar, "sidecar is not valid JSON");
  if (!doc.is_object() || !doc.contains("instances") || !doc["instances"].is_array()) {
    throw Error(Errc::kBadSidecar, "sidecar must be an object with an \"instances\" array");
  }

  Sidecar out;
  for (const json& item : doc["instances"]) {
    if (!item.is_object() || !item.contains("id") || !item["id"].is_number_integer() ||
        item["id"].get<long long>() <= 0 ||
        item["id"].get<long long>() > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(Errc::kBadSidecar, "each sidecar instance needs a positive integer \"id\"");
    }
    SidecarEntry entry;
    entry.id = item["id"].get<std::uint32_t>();
    if (item.contains("label")) {
      if (!item["label"].is_string()) {
        throw Error(Errc::kBadSidecar, "sidecar \"label\" must be a string");
      }
      entry.label = item["label"].get<std::string>();
    }
    if (item.contains("score")) {
      if (!item["score"].is_number()) {
        throw Error(Errc::kBadSidecar, "sidecar \"score\" must be a number");
      }
      const double s = item["score"].get<double>();
      if (!(s >= 0.0 && s <= 1.0)) {
        throw Error(Errc::kBadSidecar, "sidecar score must lie in [0, 1]");
      }
      entry.score = s;
    }
    for (const auto& seen : out) {
      if (seen.id == entry.id) {
        throw Error(Errc::kBadSidecar, "duplicate sidecar id " + std::to_string(entry.id));
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::string write_sidecar(const std::vector<InstanceMeta>& metas) {
  nlohmann::ordered_json doc;
  auto& list = doc["instances"] = nlohmann::ordered_json::array();
  for (const auto& m : metas) {
    list.push_back({{"id", m.id}, {"label", m.label}, {"score", m.score}});
  }
  return doc.dump();
}

void ThresholdParams::validate() const {
  cal.validate();
  if (!(std::isfinite(min_height_m) && min_height_m > 0.0)) {
    throw Error(Errc::kInvalidArgument, "min height must be > 0");
  }
  if (min_area_px < 1) throw Error(Errc::kInvalidArgument, "min area must be >= 1");
}

InstanceSet load_external(const LabelGrid& labels, const std::optional<Sidecar>& sidecar) {
  std::set<std::uint32_t> present(labels.values().begin(), labels.values().end());
  present.erase(0);

  InstanceSet set;
  set.labels = labels;
  for (std::uint32_t id : present) set.metas.push_back(InstanceMeta{.id = id});
  if (!sidecar) return set;

  for (const SidecarEntry& entry : *sidecar) {
    auto it = std::find_if(set.metas.begin(), set.metas.end(),
                           [&](const InstanceMeta& m) { return m.id == entry.id; });
    if (it == set.metas.end()) {
      throw Error(Errc::kUnknownSidecarId, "sidecar references instance id " +
                                               std::to_string(entry.id) +
                                               " which is absent from the label mask");
    }
    if (entry.label) it->label = *entry.label;
    if (entry.score) it->score = *entry.score;
  }
  return set;
}

InstanceSet segment_depth_threshold(const DepthGrid& depth, const ThresholdParams& params) {
  params.validate();
  BinaryMask foreground(depth.rows(), depth.cols());
  auto d = depth.values();
  auto f = foreground.values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    f[i] = d[i] > 0.0 && (params.cal.camera_to_ground_m - d[i]) > params.min_height_m;
  }

  const LabelGrid components = label_components(foreground);
  std::vector<std::size_t> sizes;
  for (std::uint32_t v : components.values()) {
    if (v >= sizes.size()) sizes.resize(static_cast<std::size_t>(v) + 1, 0);
    ++sizes[v];
  }

  // Components arrive ordered; keep that order among the survivors.
  std::vector<std::uint32_t> remap(sizes.size(), 0);
  InstanceSet set;
  std::uint32_t next = 1;
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    if (sizes[k] >= params.min_area_px) {
      remap[k] = next;
      set.metas.push_back(InstanceMeta{.id = next});
      ++next;
    }
  }
  set.labels = LabelGrid(depth.rows(), depth.cols());
  auto src = components.values();
  auto dst = set.labels.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = remap[src[i]];
  return set;
}

InstanceSet sorted_by_area(InstanceSet set) {
  const std::vector<std::size_t> area = set.areas();
  std::vector<std::size_t> order(set.metas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (area[a] != area[b]) return area[a] > area[b];
    return set.metas[a].id < set.metas[b].id;
  });
  std::vector<InstanceMeta> metas;
  metas.reserve(order.size());
  for (std::size_t i : order) metas.push_back(std::move(set.metas[i]));
  set.metas = std::move(metas);
  return set;
}

}  // namespace morphocv
