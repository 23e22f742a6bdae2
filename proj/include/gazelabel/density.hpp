#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gazelabel/grid.hpp"
#include "gazelabel/session.hpp"

namespace gazelabel {

// Sum of unit-peak Gaussian kernels exp(-d^2 / (2 sigma^2)) centered on the
// trace points, truncated at distance 3*sigma from the cell center.
// Deterministic for any thread count: the grid is partitioned by rows and
// each cell accumulates its contributions in trace order, so the bits never
// depend on scheduling. threads == 0 means hardware concurrency.
DensityGrid build_density_grid(const GazeTrace& trace, double sigma, const GridSpec& spec,
                               int threads = 0);

// One 8-connected component of positive-density cells.
struct Cluster {
  std::vector<std::uint32_t> cell_indices;  // ascending row-major indices
  std::size_t bin_count = 0;                // == cell_indices.size()
  double theta_bar = 0.0;                   // mean cell value over the cluster
};

// Components of the positive support, sorted by descending bin count, ties
// broken by smallest top-left (row-major) cell index.
std::vector<Cluster> extract_clusters(const DensityGrid& grid);

struct ThresholdStats {
  double theta_bar = 0.0;  // mean of per-cluster means
  double max_bin = 0.0;    // highest cell value across all cluster cells
  double scale_n = 0.0;
  double tau = 0.0;        // scale_n * theta_bar / max_bin, dimensionless
  std::size_t cluster_count = 0;

  // The same threshold in grid units. Comparing raw density against
  // cutoff() equals comparing density normalized by max_bin against tau,
  // and is invariant under rescaling the whole grid.
  double cutoff() const { return tau * max_bin; }
};

// Per-image adaptive threshold from cluster statistics.
ThresholdStats compute_threshold(const std::vector<Cluster>& clusters, const DensityGrid& grid,
                                 double n);

// Cells with density >= tau. Zero-density cells never enter the mask, so a
// non-positive tau selects exactly the positive support.
BinaryMask threshold_to_mask(const DensityGrid& grid, double tau);

// Cellwise OR; specs must match.
BinaryMask merge_masks(const BinaryMask& a, const BinaryMask& b);

struct SigmaPassStats {
  double sigma = 0.0;
  std::size_t cluster_count = 0;
  std::optional<ThresholdStats> threshold;  // absent when the pass saw no clusters
};

struct KdePipelineResult {
  BinaryMask mask;
  std::vector<SigmaPassStats> passes;
};

// Full denoising pass. For each sigma: build the density grid, extract
// clusters, derive the adaptive cutoff, threshold; the per-sigma masks are
// OR-merged. An empty trace or a pass with no clusters contributes an empty
// mask rather than an error.
KdePipelineResult run_kde_pipeline_report(const GazeTrace& trace, std::span<const double> sigmas,
                                          double n, const GridSpec& spec, int threads = 0);
BinaryMask run_kde_pipeline(const GazeTrace& trace, std::span<const double> sigmas, double n,
                            const GridSpec& spec, int threads = 0);

}  // namespace gazelabel
