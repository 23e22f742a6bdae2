#include "gazelabel/density.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "components.hpp"

namespace gazelabel {

namespace {

int resolve_threads(int threads, int rows) {
  if (threads <= 0) {
    const auto hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  return std::max(1, std::min(threads, rows));
}

// Accumulates all kernels into the row range [row_begin, row_end). Each cell
// sums its contributions in trace order, which fixes the floating-point
// result independently of how rows are partitioned across threads.
void accumulate_rows(const GazeTrace& trace, double sigma, const GridSpec& spec,
                     std::vector<double>& values, int row_begin, int row_end) {
  const double radius = 3.0 * sigma;
  const double radius_sq = radius * radius;
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  const int width = spec.width_cells;
  const double ds = spec.downsample;

  for (int cy = row_begin; cy < row_end; ++cy) {
    const double center_y = spec.center_y(cy);
    double* row = values.data() + spec.index(0, cy);
    for (const auto& p : trace.points) {
      const double dy = center_y - p.y;
      if (dy * dy > radius_sq) continue;
      const double span = std::sqrt(radius_sq - dy * dy);
      // Cell centers are at (cx + 0.5) * ds; restrict to |center_x - p.x| <= span.
      int cx_lo = static_cast<int>(std::ceil((p.x - span) / ds - 0.5));
      int cx_hi = static_cast<int>(std::floor((p.x + span) / ds - 0.5));
      cx_lo = std::max(cx_lo, 0);
      cx_hi = std::min(cx_hi, width - 1);
      for (int cx = cx_lo; cx <= cx_hi; ++cx) {
        const double dx = (cx + 0.5) * ds - p.x;
        const double d_sq = dx * dx + dy * dy;
        if (d_sq > radius_sq) continue;
        row[cx] += std::exp(-d_sq * inv_two_sigma_sq);
      }
    }
  }
}

}  // namespace

DensityGrid build_density_grid(const GazeTrace& trace, double sigma, const GridSpec& spec,
                               int threads) {
  if (sigma <= 0.0) throw ValidationError("sigma must be > 0");
  DensityGrid grid(spec, sigma);
  if (trace.points.empty()) return grid;

  const int rows = spec.height_cells;
  const int workers = resolve_threads(threads, rows);
  if (workers == 1) {
    accumulate_rows(trace, sigma, spec, grid.values, 0, rows);
    return grid;
  }

  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (rows + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(rows, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      accumulate_rows(trace, sigma, spec, grid.values, begin, end);
    });
  }
  for (auto& t : pool) t.join();
  return grid;
}

std::vector<Cluster> extract_clusters(const DensityGrid& grid) {
  const auto comps = detail::label_components(
      grid.spec.width_cells, grid.spec.height_cells,
      [&](std::size_t idx) { return grid.values[idx] > 0.0; });

  std::vector<Cluster> clusters;
  clusters.reserve(comps.size());
  for (const auto& comp : comps) {
    Cluster c;
    c.cell_indices = comp;
    c.bin_count = comp.size();
    double sum = 0.0;
    for (const auto idx : comp) sum += grid.values[idx];
    c.theta_bar = sum / static_cast<double>(comp.size());
    clusters.push_back(std::move(c));
  }
  return clusters;
}

ThresholdStats compute_threshold(const std::vector<Cluster>& clusters, const DensityGrid& grid,
                                 double n) {
  if (n <= 0.0) throw ValidationError("scaling factor n must be > 0");
  if (clusters.empty()) throw ValidationError("no gaze clusters");

  ThresholdStats stats;
  stats.scale_n = n;
  stats.cluster_count = clusters.size();

  double sum_means = 0.0;
  double max_bin = 0.0;
  for (const auto& c : clusters) {
    sum_means += c.theta_bar;
    for (const auto idx : c.cell_indices) max_bin = std::max(max_bin, grid.values[idx]);
  }
  stats.theta_bar = sum_means / static_cast<double>(clusters.size());
  stats.max_bin = max_bin;
  stats.tau = n * stats.theta_bar / max_bin;
  return stats;
}

BinaryMask threshold_to_mask(const DensityGrid& grid, double tau) {
  BinaryMask mask(grid.spec);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const double v = grid.values[i];
    mask.bits[i] = (v > 0.0 && v >= tau) ? 1 : 0;
  }
  return mask;
}

BinaryMask merge_masks(const BinaryMask& a, const BinaryMask& b) {
  if (!(a.spec == b.spec)) throw ValidationError("mask dimensions differ");
  BinaryMask out(a.spec);
  for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = (a.bits[i] | b.bits[i]);
  return out;
}

KdePipelineResult run_kde_pipeline_report(const GazeTrace& trace, std::span<const double> sigmas,
                                          double n, const GridSpec& spec, int threads) {
  if (sigmas.empty()) throw ValidationError("at least one sigma is required");
  for (const double s : sigmas)
    if (s <= 0.0) throw ValidationError("sigma must be > 0");
  if (n <= 0.0) throw ValidationError("scaling factor n must be > 0");

  KdePipelineResult result;
  result.mask = BinaryMask(spec);
  for (const double sigma : sigmas) {
    const DensityGrid grid = build_density_grid(trace, sigma, spec, threads);
    const auto clusters = extract_clusters(grid);
    SigmaPassStats pass;
    pass.sigma = sigma;
    pass.cluster_count = clusters.size();
    if (!clusters.empty()) {
      const ThresholdStats stats = compute_threshold(clusters, grid, n);
      pass.threshold = stats;
      result.mask = merge_masks(result.mask, threshold_to_mask(grid, stats.cutoff()));
    }
    result.passes.push_back(pass);
  }
  return result;
}

BinaryMask run_kde_pipeline(const GazeTrace& trace, std::span<const double> sigmas, double n,
                            const GridSpec& spec, int threads) {
  return run_kde_pipeline_report(trace, sigmas, n, spec, threads).mask;
}

}  // namespace gazelabel
