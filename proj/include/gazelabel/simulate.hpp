#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gazelabel/geometry.hpp"
#include "gazelabel/grid.hpp"
#include "gazelabel/session.hpp"

namespace gazelabel {

struct SimParams {
  double sample_rate_hz = 60.0;
  // Dwell per ROI fixation in seconds. Larger ROIs take longer to examine:
  // the dwell interpolates linearly across [min, max] with the ROI's radius
  // relative to the scene's radius spread.
  double dwell_min_s = 1.0;
  double dwell_max_s = 2.0;
  // Stddev of the gaze scatter around an ROI centroid, as a fraction of the
  // ROI radius. Isotropic.
  double fixation_jitter = 0.35;
  // Samples placed on the straight line between consecutive visit centroids.
  int saccade_samples_per_transition = 5;
  // Off-ROI fixation bursts per session, at uniform random slide locations.
  int distractor_fixations = 2;
  double distractor_dwell_s = 0.5;
  // When set, each ROI visit gets its own pan/zoom viewport event framing the
  // ROI; otherwise the session carries a single identity viewport at t = 0.
  bool pan_zoom_events = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RoiEllipse {
  double cx = 0.0;  // slide px
  double cy = 0.0;
  double semi_x = 0.0;
  double semi_y = 0.0;

  double mean_radius() const { return 0.5 * (semi_x + semi_y); }
  // scale dilates the ellipse about its centroid.
  bool contains(double x, double y, double scale = 1.0) const;
  BBox tight_box(std::int64_t slide_width, std::int64_t slide_height) const;
};

struct GTScene {
  SlideGeometry geometry;
  std::vector<RoiEllipse> rois;
  BinaryMask gt_mask;
  std::vector<BBox> gt_boxes;
};

// Rejection-samples roi_count non-overlapping axis-aligned ellipses with
// semi-axes in radius_range, fully inside the slide, rasterizes them at the
// given grid resolution and derives tight boxes. Deterministic given seed.
GTScene generate_scene(int roi_count, std::pair<double, double> radius_range,
                       const SlideGeometry& geometry, const GridSpec& grid, std::uint64_t seed);

// Synthesizes a gaze session over the scene: ROIs are visited in random
// order with jittered fixation samples, connected by saccade samples on the
// transit lines, with distractor fixations mixed in. Timestamps advance at
// exactly 1000/rate ms. Deterministic given params.seed.
GazeSession simulate_trace(const GTScene& scene, const SimParams& params);

}  // namespace gazelabel
