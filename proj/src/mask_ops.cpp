#include "gazelabel/mask_ops.hpp"

#include <algorithm>
#include <cmath>

#include "components.hpp"

namespace gazelabel {

std::vector<std::vector<std::uint32_t>> connected_components(const BinaryMask& mask) {
  return detail::label_components(mask.spec.width_cells, mask.spec.height_cells,
                                  [&](std::size_t idx) { return mask.bits[idx] != 0; });
}

BoxExtraction mask_to_bboxes(const BinaryMask& mask, std::int64_t min_area_px) {
  const auto& spec = mask.spec;
  const std::int64_t ds = spec.downsample;
  if (min_area_px < 0) min_area_px = ds * ds;

  BoxExtraction out;
  for (const auto& comp : connected_components(mask)) {
    int cx_min = spec.width_cells, cx_max = -1, cy_min = spec.height_cells, cy_max = -1;
    for (const auto idx : comp) {
      const int cx = static_cast<int>(idx % spec.width_cells);
      const int cy = static_cast<int>(idx / spec.width_cells);
      cx_min = std::min(cx_min, cx);
      cx_max = std::max(cx_max, cx);
      cy_min = std::min(cy_min, cy);
      cy_max = std::max(cy_max, cy);
    }
    BBox box{cx_min * ds, cy_min * ds, std::min((cx_max + 1) * ds, spec.slide_width),
             std::min((cy_max + 1) * ds, spec.slide_height)};
    if (box.area() < min_area_px) {
      ++out.discarded_small;
      continue;
    }
    out.boxes.push_back(box);
  }
  return out;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (!(a.spec == b.spec)) throw ValidationError("mask dimensions differ");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    const bool va = a.bits[i] != 0;
    const bool vb = b.bits[i] != 0;
    inter += (va && vb) ? 1 : 0;
    uni += (va || vb) ? 1 : 0;
  }
  if (uni == 0) return 1.0;  // agreement on absence
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MIOUSummary miou_summary(std::span<const double> ious) {
  if (ious.empty()) throw ValidationError("no IOU values to summarize");
  double sum = 0.0;
  for (const double v : ious) sum += v;
  const double mean = sum / static_cast<double>(ious.size());
  double var = 0.0;
  for (const double v : ious) var += (v - mean) * (v - mean);
  var /= static_cast<double>(ious.size());
  return MIOUSummary{mean, std::sqrt(var), ious.size()};
}

MIOUSummary masks_miou(std::span<const MaskPair> pairs) {
  if (pairs.empty()) throw ValidationError("no mask pairs to compare");
  std::vector<double> ious;
  ious.reserve(pairs.size());
  for (const auto& p : pairs) ious.push_back(mask_iou(*p.hand, *p.gaze));
  return miou_summary(ious);
}

}  // namespace gazelabel
