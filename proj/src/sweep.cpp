#include "gazelabel/sweep.hpp"

#include <algorithm>
#include <thread>

#include "gazelabel/density.hpp"

namespace gazelabel {

double SweepResult::mean_clusters(std::size_t si) const {
  const auto& counts = cluster_counts[si];
  if (counts.empty()) return 0.0;
  double sum = 0.0;
  for (const auto c : counts) sum += static_cast<double>(c);
  return sum / static_cast<double>(counts.size());
}

SweepResult param_sweep(std::span<const SweepInput> inputs, std::span<const double> sigmas,
                        std::span<const double> ns, int threads) {
  if (inputs.empty()) throw ValidationError("no sweep inputs");
  if (sigmas.empty() || ns.empty()) throw ValidationError("sigma and n lists must be non-empty");
  for (const double s : sigmas)
    if (s <= 0.0) throw ValidationError("sigma must be > 0");
  for (const double n : ns)
    if (n <= 0.0) throw ValidationError("scaling factor n must be > 0");

  const std::size_t cell_count = sigmas.size() * ns.size();
  // Per input: IOU per cell, plus cluster count per sigma.
  std::vector<std::vector<double>> ious(inputs.size(), std::vector<double>(cell_count, 0.0));
  std::vector<std::vector<std::size_t>> counts(inputs.size(),
                                               std::vector<std::size_t>(sigmas.size(), 0));

  const auto process = [&](std::size_t t) {
    const auto& input = inputs[t];
    const GridSpec& spec = input.gt_mask.spec;
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
      // One grid per sigma; every n reuses the same clustering.
      const DensityGrid grid = build_density_grid(input.trace, sigmas[si], spec, 1);
      const auto clusters = extract_clusters(grid);
      counts[t][si] = clusters.size();
      for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        BinaryMask mask(spec);
        if (!clusters.empty()) {
          const ThresholdStats stats = compute_threshold(clusters, grid, ns[ni]);
          mask = threshold_to_mask(grid, stats.cutoff());
        }
        ious[t][si * ns.size() + ni] = mask_iou(input.gt_mask, mask);
      }
    }
  };

  int workers = threads;
  if (workers <= 0) {
    const auto hw = std::thread::hardware_concurrency();
    workers = hw == 0 ? 1 : static_cast<int>(hw);
  }
  workers = std::min<int>(workers, static_cast<int>(inputs.size()));

  if (workers <= 1) {
    for (std::size_t t = 0; t < inputs.size(); ++t) process(t);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = static_cast<std::size_t>(w); t < inputs.size();
             t += static_cast<std::size_t>(workers))
          process(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  result.sigmas.assign(sigmas.begin(), sigmas.end());
  result.ns.assign(ns.begin(), ns.end());
  result.cells.resize(cell_count);
  result.cluster_counts.assign(sigmas.size(), std::vector<std::size_t>(inputs.size(), 0));
  for (std::size_t si = 0; si < sigmas.size(); ++si)
    for (std::size_t t = 0; t < inputs.size(); ++t) result.cluster_counts[si][t] = counts[t][si];

  // Aggregation runs in input order, so the result is thread-count agnostic.
  std::vector<double> cell_ious(inputs.size());
  double best = -1.0;
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      const std::size_t cell = si * ns.size() + ni;
      for (std::size_t t = 0; t < inputs.size(); ++t) cell_ious[t] = ious[t][cell];
      result.cells[cell].miou = miou_summary(cell_ious);
      if (result.cells[cell].miou.mean > best) {
        best = result.cells[cell].miou.mean;
        result.best_sigma_index = si;
        result.best_n_index = ni;
      }
    }
  }

  const std::size_t best_cell = result.best_sigma_index * ns.size() + result.best_n_index;
  for (std::size_t t = 0; t < inputs.size(); ++t)
    result.best_cell_scores.push_back(
        MaskPairScore{inputs[t].id + ":gt", inputs[t].id + ":kde", ious[t][best_cell]});
  return result;
}

}  // namespace gazelabel
