#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphocv/grid.hpp"
#include "morphocv/types.hpp"

namespace morphocv {

// Labeled instances from any mask provider. metas are in the order the
// instances should be reported and rendered.
struct InstanceSet {
  LabelGrid labels;
  std::vector<InstanceMeta> metas;

  BinaryMask mask(std::uint32_t id) const { return mask_of(labels, id); }
  // Pixel count per entry of metas.
  std::vector<std::size_t> areas() const;
};

// Per-instance metadata from the JSON sidecar; absent fields are defaulted.
struct SidecarEntry {
  std::uint32_t id = 0;
  std::optional<std::string> label;
  std::optional<double> score;
};

using Sidecar = std::vector<SidecarEntry>;

// {"instances":[{"id":1,"label":"pig","score":0.97}]}
Sidecar parse_sidecar(std::string_view json_text);
std::string write_sidecar(const std::vector<InstanceMeta>& metas);

struct ThresholdParams {
  double min_height_m = 0.05;
  std::size_t min_area_px = 25;
  Calibration cal;

  void validate() const;
};

// One instance per distinct nonzero id, ordered by id.
InstanceSet load_external(const LabelGrid& labels, const std::optional<Sidecar>& sidecar);

// Foreground is depth > 0 and height above ground > min_height_m; 8-connected
// components of at least min_area_px pixels become instances 1..N.
InstanceSet segment_depth_threshold(const DepthGrid& depth, const ThresholdParams& params);

// Reorders metas by descending area, then ascending id.
InstanceSet sorted_by_area(InstanceSet set);

}  // namespace morphocv
