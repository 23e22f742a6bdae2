#include "gazelabel/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "gazelabel/rng.hpp"

namespace gazelabel {

void SimParams::validate() const {
  if (sample_rate_hz <= 0.0) throw ValidationError("sample rate must be > 0");
  if (dwell_min_s <= 0.0 || dwell_max_s < dwell_min_s)
    throw ValidationError("dwell range must satisfy 0 < min <= max");
  if (fixation_jitter < 0.0) throw ValidationError("fixation jitter must be >= 0");
  if (saccade_samples_per_transition < 0) throw ValidationError("saccade sample count must be >= 0");
  if (distractor_fixations < 0) throw ValidationError("distractor count must be >= 0");
  if (distractor_dwell_s < 0.0) throw ValidationError("distractor dwell must be >= 0");
}

bool RoiEllipse::contains(double x, double y, double scale) const {
  const double nx = (x - cx) / (semi_x * scale);
  const double ny = (y - cy) / (semi_y * scale);
  return nx * nx + ny * ny <= 1.0;
}

BBox RoiEllipse::tight_box(std::int64_t slide_width, std::int64_t slide_height) const {
  BBox box{static_cast<std::int64_t>(std::floor(cx - semi_x)),
           static_cast<std::int64_t>(std::floor(cy - semi_y)),
           static_cast<std::int64_t>(std::ceil(cx + semi_x)),
           static_cast<std::int64_t>(std::ceil(cy + semi_y))};
  box.x_min = std::max<std::int64_t>(box.x_min, 0);
  box.y_min = std::max<std::int64_t>(box.y_min, 0);
  box.x_max = std::min(box.x_max, slide_width);
  box.y_max = std::min(box.y_max, slide_height);
  return box;
}

namespace {

// Ellipses are accepted only when their boxes, inflated by a quarter of the
// larger semi-axis, stay disjoint; keeps scenes separable for clustering.
BBox separation_box(const RoiEllipse& roi) {
  const double gap = 0.25 * std::max(roi.semi_x, roi.semi_y);
  return BBox{static_cast<std::int64_t>(std::floor(roi.cx - roi.semi_x - gap)),
              static_cast<std::int64_t>(std::floor(roi.cy - roi.semi_y - gap)),
              static_cast<std::int64_t>(std::ceil(roi.cx + roi.semi_x + gap)),
              static_cast<std::int64_t>(std::ceil(roi.cy + roi.semi_y + gap))};
}

void rasterize(const RoiEllipse& roi, BinaryMask& mask) {
  const auto& spec = mask.spec;
  const int cx_lo = std::max(0, static_cast<int>((roi.cx - roi.semi_x) / spec.downsample) - 1);
  const int cx_hi =
      std::min(spec.width_cells - 1, static_cast<int>((roi.cx + roi.semi_x) / spec.downsample) + 1);
  const int cy_lo = std::max(0, static_cast<int>((roi.cy - roi.semi_y) / spec.downsample) - 1);
  const int cy_hi =
      std::min(spec.height_cells - 1, static_cast<int>((roi.cy + roi.semi_y) / spec.downsample) + 1);
  for (int cy = cy_lo; cy <= cy_hi; ++cy)
    for (int cx = cx_lo; cx <= cx_hi; ++cx)
      if (roi.contains(spec.center_x(cx), spec.center_y(cy))) mask.set(cx, cy);
}

}  // namespace

GTScene generate_scene(int roi_count, std::pair<double, double> radius_range,
                       const SlideGeometry& geometry, const GridSpec& grid, std::uint64_t seed) {
  if (roi_count < 0) throw ValidationError("roi count must be >= 0");
  const auto [radius_lo, radius_hi] = radius_range;
  if (radius_lo <= 0.0 || radius_hi < radius_lo)
    throw ValidationError("radius range must satisfy 0 < lo <= hi");
  geometry.validate();
  if (grid.slide_width != geometry.slide_width || grid.slide_height != geometry.slide_height)
    throw ValidationError("grid spec does not match the slide geometry");

  GTScene scene;
  scene.geometry = geometry;
  scene.gt_mask = BinaryMask(grid);

  SeededRng rng(seed);
  const int max_attempts_per_roi = 1000;
  for (int i = 0; i < roi_count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts_per_roi && !placed; ++attempt) {
      RoiEllipse roi;
      roi.semi_x = rng.uniform(radius_lo, radius_hi);
      // Mild eccentricity; KPs are close to circular.
      roi.semi_y = std::clamp(roi.semi_x * rng.uniform(0.8, 1.25), radius_lo, radius_hi);
      if (2.0 * roi.semi_x >= static_cast<double>(geometry.slide_width) ||
          2.0 * roi.semi_y >= static_cast<double>(geometry.slide_height))
        continue;
      roi.cx = rng.uniform(roi.semi_x, static_cast<double>(geometry.slide_width) - roi.semi_x);
      roi.cy = rng.uniform(roi.semi_y, static_cast<double>(geometry.slide_height) - roi.semi_y);

      const BBox candidate = separation_box(roi);
      bool overlaps = false;
      for (const auto& other : scene.rois) {
        if (intersection_area(candidate, separation_box(other)) > 0) {
          overlaps = true;
          break;
        }
      }
      if (overlaps) continue;
      scene.rois.push_back(roi);
      placed = true;
    }
    if (!placed)
      throw ValidationError("unable to place ROI " + std::to_string(i) +
                            " after " + std::to_string(max_attempts_per_roi) + " attempts");
  }

  for (const auto& roi : scene.rois) {
    rasterize(roi, scene.gt_mask);
    scene.gt_boxes.push_back(roi.tight_box(geometry.slide_width, geometry.slide_height));
  }
  return scene;
}

namespace {

struct Visit {
  double x = 0.0;
  double y = 0.0;
  double jitter_px = 0.0;
  double dwell_s = 0.0;
  double frame_radius = 0.0;  // for pan/zoom framing
};

}  // namespace

GazeSession simulate_trace(const GTScene& scene, const SimParams& params) {
  params.validate();
  scene.geometry.validate();
  SeededRng rng(params.seed);

  // Radius spread of the scene, for the dwell ramp and distractor scatter.
  double r_lo = 0.0, r_hi = 0.0, r_mean = 0.0;
  if (!scene.rois.empty()) {
    r_lo = r_hi = scene.rois.front().mean_radius();
    for (const auto& roi : scene.rois) {
      const double r = roi.mean_radius();
      r_lo = std::min(r_lo, r);
      r_hi = std::max(r_hi, r);
      r_mean += r;
    }
    r_mean /= static_cast<double>(scene.rois.size());
  }

  // Random ROI visiting order (Fisher-Yates).
  std::vector<std::size_t> order(scene.rois.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

  std::vector<Visit> visits;
  visits.reserve(order.size() + params.distractor_fixations);
  for (const std::size_t roi_idx : order) {
    const auto& roi = scene.rois[roi_idx];
    const double r = roi.mean_radius();
    const double t = r_hi > r_lo ? (r - r_lo) / (r_hi - r_lo) : 0.5;
    Visit v;
    v.x = roi.cx;
    v.y = roi.cy;
    v.jitter_px = params.fixation_jitter * r;
    v.dwell_s = params.dwell_min_s + (params.dwell_max_s - params.dwell_min_s) * t;
    v.frame_radius = std::max(roi.semi_x, roi.semi_y);
    visits.push_back(v);
  }

  // Distractor fixations: short dwells at uniform random slide locations,
  // spliced into the visiting order.
  for (int d = 0; d < params.distractor_fixations; ++d) {
    Visit v;
    v.x = rng.uniform(0.0, static_cast<double>(scene.geometry.slide_width));
    v.y = rng.uniform(0.0, static_cast<double>(scene.geometry.slide_height));
    v.jitter_px = params.fixation_jitter * r_mean;
    v.dwell_s = params.distractor_dwell_s;
    v.frame_radius = 0.0;  // distractors do not re-frame the viewport
    const auto pos = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(visits.size())));
    visits.insert(visits.begin() + pos, v);
  }

  GazeSession session;
  session.geometry = scene.geometry;

  ViewportEvent active{0.0, 0.0, 0.0, 1.0};
  if (!params.pan_zoom_events) session.viewport_events.push_back(active);

  const double step_ms = 1000.0 / params.sample_rate_hz;
  std::int64_t tick = 0;
  const auto emit = [&](double slide_x, double slide_y) {
    GazeSample s;
    s.t_ms = static_cast<double>(tick++) * step_ms;
    const SlidePoint screen = slide_to_screen(SlidePoint{slide_x, slide_y}, active);
    s.x = screen.x;
    s.y = screen.y;
    s.valid = true;
    session.samples.push_back(s);
    return s.t_ms;
  };

  bool have_prev = false;
  double prev_x = 0.0, prev_y = 0.0;
  for (const auto& visit : visits) {
    // Saccade samples along the straight line from the previous centroid.
    if (have_prev) {
      for (int k = 1; k <= params.saccade_samples_per_transition; ++k) {
        const double f =
            static_cast<double>(k) / static_cast<double>(params.saccade_samples_per_transition + 1);
        emit(prev_x + (visit.x - prev_x) * f, prev_y + (visit.y - prev_y) * f);
      }
    }

    if (params.pan_zoom_events && visit.frame_radius > 0.0) {
      // Re-frame the viewport around the ROI before the fixation starts.
      ViewportEvent vp;
      vp.t_ms = static_cast<double>(tick) * step_ms;
      vp.scale = std::max(8.0 * visit.frame_radius / static_cast<double>(scene.geometry.screen_width),
                          1e-6);
      vp.offset_x = visit.x - 0.5 * static_cast<double>(scene.geometry.screen_width) * vp.scale;
      vp.offset_y = visit.y - 0.5 * static_cast<double>(scene.geometry.screen_height) * vp.scale;
      session.viewport_events.push_back(vp);
      active = vp;
    } else if (params.pan_zoom_events && session.viewport_events.empty()) {
      session.viewport_events.push_back(active);  // ensure state before the first sample
    }

    const auto count = static_cast<std::int64_t>(std::llround(visit.dwell_s * params.sample_rate_hz));
    for (std::int64_t k = 0; k < count; ++k) {
      const double jx = visit.jitter_px > 0.0 ? rng.gaussian(0.0, visit.jitter_px) : 0.0;
      const double jy = visit.jitter_px > 0.0 ? rng.gaussian(0.0, visit.jitter_px) : 0.0;
      emit(visit.x + jx, visit.y + jy);
    }
    prev_x = visit.x;
    prev_y = visit.y;
    have_prev = true;
  }

  if (session.viewport_events.empty()) session.viewport_events.push_back(active);
  return session;
}

}  // namespace gazelabel
