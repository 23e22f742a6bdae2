#pragma once

#include <span>
#include <string>
#include <vector>

#include "gazelabel/geometry.hpp"
#include "gazelabel/grid.hpp"

namespace gazelabel {

// 8-connected components of set cells, each as an ascending cell-index list,
// ordered by descending size then smallest cell index.
std::vector<std::vector<std::uint32_t>> connected_components(const BinaryMask& mask);

struct BoxExtraction {
  std::vector<BBox> boxes;          // slide px, component order
  std::size_t discarded_small = 0;  // dropped by the min-area filter
};

// Tight slide-pixel box per component, clipped to the slide. min_area_px < 0
// selects the default of one grid cell (downsample^2).
BoxExtraction mask_to_bboxes(const BinaryMask& mask, std::int64_t min_area_px = -1);

// |a AND b| / |a OR b|. Both masks empty counts as perfect agreement (1.0);
// exactly one empty is 0.0. Specs must match.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

struct MaskPair {
  const BinaryMask* hand = nullptr;
  const BinaryMask* gaze = nullptr;
};

struct MaskPairScore {
  std::string hand_id;
  std::string gaze_id;
  double iou = 0.0;
};

struct MIOUSummary {
  double mean = 0.0;
  double std_dev = 0.0;  // population
  std::size_t count = 0;
};

MIOUSummary masks_miou(std::span<const MaskPair> pairs);
MIOUSummary miou_summary(std::span<const double> ious);

}  // namespace gazelabel
