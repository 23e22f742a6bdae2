#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gazelabel/grid.hpp"
#include "gazelabel/mask_ops.hpp"
#include "gazelabel/session.hpp"

namespace gazelabel {

struct SweepInput {
  std::string id;
  GazeTrace trace;
  BinaryMask gt_mask;
};

struct SweepCell {
  MIOUSummary miou;
};

// Grid search over (sigma, n). Cells are row-major with sigma as the outer
// axis. cluster_counts[si][trace] records how many clusters the sigma pass
// saw on each trace.
struct SweepResult {
  std::vector<double> sigmas;
  std::vector<double> ns;
  std::vector<SweepCell> cells;
  std::vector<std::vector<std::size_t>> cluster_counts;
  std::size_t best_sigma_index = 0;
  std::size_t best_n_index = 0;
  // Per-input hand-vs-gaze scores at the winning cell.
  std::vector<MaskPairScore> best_cell_scores;

  const SweepCell& cell(std::size_t si, std::size_t ni) const {
    return cells[si * ns.size() + ni];
  }
  double mean_clusters(std::size_t si) const;
};

// Runs the single-sigma pipeline for every (sigma, n) pair on every input
// and summarizes the per-pair IOU against the ground-truth mask. Inputs are
// processed in parallel (threads == 0 means hardware concurrency); results
// are aggregated in input order, so the output is deterministic.
SweepResult param_sweep(std::span<const SweepInput> inputs, std::span<const double> sigmas,
                        std::span<const double> ns, int threads = 0);

}  // namespace gazelabel
