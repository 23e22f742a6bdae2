#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "gazelabel/geometry.hpp"

namespace gazelabel {

// Intersection-over-union with half-open integer-pixel areas.
double box_iou(const BBox& a, const BBox& b);

struct Detection {
  std::int64_t image_id = 0;
  BBox bbox;
  double confidence = 0.0;  // in [0, 1]
};

struct RankedDetection {
  double confidence = 0.0;
  std::int64_t image_id = 0;
  bool tp = false;
};

struct MatchResult {
  std::vector<RankedDetection> ranked;  // descending confidence
  std::int64_t gt_total = 0;
  std::map<std::int64_t, std::int64_t> fp_per_image;
};

using GroundTruth = std::map<std::int64_t, std::vector<BBox>>;

// Greedy matching: detections are ranked by descending confidence (ties by
// smaller image id, then input order); each detection consumes the unmatched
// same-image ground-truth box of highest IOU when that IOU >= ot, and is a
// false positive otherwise.
MatchResult match_detections(std::span<const Detection> dets, const GroundTruth& gts, double ot);

struct PrPoint {
  double confidence = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct MrPoint {
  double confidence = 0.0;
  double fppi = 0.0;
  double miss_rate = 0.0;
};

// Cumulative precision/recall at each distinct confidence cutoff, and AP as
// the area under the monotone precision envelope over recall (all-point
// interpolation). Single class, so mAP == AP.
std::pair<std::vector<PrPoint>, double> pr_curve_and_ap(const MatchResult& match);

// Miss-rate vs FPPI points at each distinct confidence cutoff, and the
// log-average miss rate: the geometric mean of the lowest miss rate achieved
// at FPPI <= each of 9 reference points log-spaced over [1e-2, 1e0] (1.0 when
// no point qualifies), with miss rates floored at 1e-10.
std::pair<std::vector<MrPoint>, double> miss_rate_fppi_and_lamr(const MatchResult& match,
                                                                std::int64_t image_count);

struct EvalReport {
  double ot = 0.0;
  std::vector<PrPoint> pr_points;
  std::vector<MrPoint> mr_points;
  double ap = 0.0;
  double lamr = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t gt = 0;
};

std::vector<EvalReport> ot_sweep(std::span<const Detection> dets, const GroundTruth& gts,
                                 std::int64_t image_count, std::span<const double> ot_values);

// 0.10, 0.15, ..., 0.95.
std::vector<double> default_ot_grid();

}  // namespace gazelabel
