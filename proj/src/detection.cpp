#include "gazelabel/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gazelabel {

double box_iou(const BBox& a, const BBox& b) {
  const std::int64_t inter = intersection_area(a, b);
  const std::int64_t uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MatchResult match_detections(std::span<const Detection> dets, const GroundTruth& gts, double ot) {
  if (ot <= 0.0 || ot > 1.0) throw ValidationError("overlap threshold must be in (0, 1]");
  for (const auto& d : dets)
    if (d.confidence < 0.0 || d.confidence > 1.0 || !std::isfinite(d.confidence))
      throw ValidationError("detection confidence must be in [0, 1]");

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].confidence != dets[b].confidence) return dets[a].confidence > dets[b].confidence;
    if (dets[a].image_id != dets[b].image_id) return dets[a].image_id < dets[b].image_id;
    return a < b;
  });

  std::map<std::int64_t, std::vector<bool>> consumed;
  for (const auto& [image, boxes] : gts) consumed[image].assign(boxes.size(), false);

  MatchResult result;
  result.ranked.reserve(dets.size());
  for (const auto& [image, boxes] : gts) result.gt_total += static_cast<std::int64_t>(boxes.size());

  for (const std::size_t idx : order) {
    const Detection& det = dets[idx];
    bool matched = false;
    const auto git = gts.find(det.image_id);
    if (git != gts.end()) {
      auto& used = consumed[det.image_id];
      double best_iou = 0.0;
      std::size_t best = git->second.size();
      for (std::size_t g = 0; g < git->second.size(); ++g) {
        if (used[g]) continue;
        const double iou = box_iou(det.bbox, git->second[g]);
        if (iou > best_iou) {
          best_iou = iou;
          best = g;
        }
      }
      if (best < git->second.size() && best_iou >= ot) {
        used[best] = true;
        matched = true;
      }
    }
    if (!matched) ++result.fp_per_image[det.image_id];
    result.ranked.push_back(RankedDetection{det.confidence, det.image_id, matched});
  }
  return result;
}

namespace {

// Indices into the ranked list marking the last member of each confidence
// tie group; these are the valid operating points of a confidence cutoff.
std::vector<std::size_t> cutoff_indices(const std::vector<RankedDetection>& ranked) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (i + 1 == ranked.size() || ranked[i + 1].confidence != ranked[i].confidence)
      idx.push_back(i);
  }
  return idx;
}

}  // namespace

std::pair<std::vector<PrPoint>, double> pr_curve_and_ap(const MatchResult& match) {
  if (match.gt_total <= 0) throw ValidationError("no ground truth");
  const auto& ranked = match.ranked;
  const double gt = static_cast<double>(match.gt_total);

  std::vector<double> precision(ranked.size());
  std::vector<double> recall(ranked.size());
  std::int64_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    tp += ranked[i].tp ? 1 : 0;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / gt;
  }

  // Monotone (non-increasing) precision envelope, then integrate over the
  // recall steps contributed by true positives.
  std::vector<double> envelope = precision;
  for (std::size_t i = envelope.size(); i-- > 1;)
    envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);
  double ap = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i)
    if (ranked[i].tp) ap += envelope[i] / gt;

  std::vector<PrPoint> points;
  for (const std::size_t i : cutoff_indices(ranked))
    points.push_back(PrPoint{ranked[i].confidence, precision[i], recall[i]});
  return {std::move(points), ap};
}

std::pair<std::vector<MrPoint>, double> miss_rate_fppi_and_lamr(const MatchResult& match,
                                                                std::int64_t image_count) {
  if (image_count <= 0) throw ValidationError("image count must be > 0");
  if (match.gt_total <= 0) throw ValidationError("no ground truth");
  const auto& ranked = match.ranked;
  const double gt = static_cast<double>(match.gt_total);
  const double images = static_cast<double>(image_count);

  std::vector<MrPoint> points;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  {
    std::size_t next = 0;
    const auto cutoffs = cutoff_indices(ranked);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      tp += ranked[i].tp ? 1 : 0;
      fp += ranked[i].tp ? 0 : 1;
      if (next < cutoffs.size() && cutoffs[next] == i) {
        points.push_back(MrPoint{ranked[i].confidence, static_cast<double>(fp) / images,
                                 1.0 - static_cast<double>(tp) / gt});
        ++next;
      }
    }
  }

  constexpr double kMissRateFloor = 1e-10;
  double log_sum = 0.0;
  constexpr int kReferences = 9;
  for (int k = 0; k < kReferences; ++k) {
    const double ref = std::pow(10.0, -2.0 + 2.0 * k / (kReferences - 1));
    double best = 1.0;  // nothing achievable at this FPPI budget
    for (const auto& p : points)
      if (p.fppi <= ref) best = std::min(best, p.miss_rate);
    log_sum += std::log(std::max(best, kMissRateFloor));
  }
  const double lamr = std::exp(log_sum / kReferences);
  return {std::move(points), lamr};
}

std::vector<EvalReport> ot_sweep(std::span<const Detection> dets, const GroundTruth& gts,
                                 std::int64_t image_count, std::span<const double> ot_values) {
  if (ot_values.empty()) throw ValidationError("at least one overlap threshold is required");
  std::vector<EvalReport> reports;
  reports.reserve(ot_values.size());
  for (const double ot : ot_values) {
    const MatchResult match = match_detections(dets, gts, ot);
    EvalReport report;
    report.ot = ot;
    report.gt = match.gt_total;
    for (const auto& r : match.ranked) (r.tp ? report.tp : report.fp) += 1;
    auto [pr, ap] = pr_curve_and_ap(match);
    auto [mr, lamr] = miss_rate_fppi_and_lamr(match, image_count);
    report.pr_points = std::move(pr);
    report.mr_points = std::move(mr);
    report.ap = ap;
    report.lamr = lamr;
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<double> default_ot_grid() {
  std::vector<double> grid;
  for (int i = 10; i <= 95; i += 5) grid.push_back(i / 100.0);
  return grid;
}

}  // namespace gazelabel
