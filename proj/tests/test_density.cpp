#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "gazelabel/density.hpp"
#include "gazelabel/rng.hpp"

using namespace gazelabel;

namespace {

// Independent oracle: per-cell scan over all points with the same 3-sigma
// inclusion rule, accumulated in long double.
DensityGrid brute_force_density(const GazeTrace& trace, double sigma, const GridSpec& spec) {
  DensityGrid grid(spec, sigma);
  const double radius_sq = 9.0 * sigma * sigma;
  for (int cy = 0; cy < spec.height_cells; ++cy) {
    for (int cx = 0; cx < spec.width_cells; ++cx) {
      long double sum = 0.0L;
      for (const auto& p : trace.points) {
        const double dx = spec.center_x(cx) - p.x;
        const double dy = spec.center_y(cy) - p.y;
        const double d_sq = dx * dx + dy * dy;
        if (d_sq > radius_sq) continue;
        sum += std::exp(-d_sq / (2.0 * sigma * sigma));
      }
      grid.at(cx, cy) = static_cast<double>(sum);
    }
  }
  return grid;
}

GazeTrace trace_of(std::initializer_list<std::pair<double, double>> pts) {
  GazeTrace t;
  double time = 0;
  for (const auto& [x, y] : pts) t.points.push_back(TracePoint{x, y, time += 16.0});
  return t;
}

}  // namespace

TEST_CASE("empty trace gives an all-zero grid") {
  const GridSpec spec = GridSpec::for_slide(640, 640, 16);
  const DensityGrid grid = build_density_grid(GazeTrace{}, 100.0, spec);
  for (const double v : grid.values) CHECK(v == 0.0);
}

TEST_CASE("unit peak at a cell center, additive for coincident points") {
  const GridSpec spec = GridSpec::for_slide(640, 640, 16);
  const double cx = spec.center_x(10);
  const double cy = spec.center_y(12);
  const DensityGrid one = build_density_grid(trace_of({{cx, cy}}), 50.0, spec);
  CHECK(one.at(10, 12) == 1.0);
  const DensityGrid two = build_density_grid(trace_of({{cx, cy}, {cx, cy}}), 50.0, spec);
  CHECK(two.at(10, 12) == 2.0);
}

TEST_CASE("value at distance sigma is exp(-1/2)") {
  const GridSpec spec = GridSpec::for_slide(640, 640, 16);
  const double sigma = 48.0;
  // Point exactly sigma to the right of cell (10, 12)'s center.
  const DensityGrid grid =
      build_density_grid(trace_of({{spec.center_x(10) + sigma, spec.center_y(12)}}), sigma, spec);
  CHECK(grid.at(10, 12) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(grid.at(10, 12) == doctest::Approx(0.606531).epsilon(1e-6));
}

TEST_CASE("contributions past 3 sigma are omitted") {
  const GridSpec spec = GridSpec::for_slide(6400, 64, 16);
  const double sigma = 32.0;
  const double cy = spec.center_y(1);
  const DensityGrid grid = build_density_grid(trace_of({{spec.center_x(20), cy}}), sigma, spec);
  // 3*sigma = 96 px = 6 cells; the cell 7 cells away must stay zero.
  CHECK(grid.at(26, 1) > 0.0);
  CHECK(grid.at(27, 1) == 0.0);
}

TEST_CASE("sigma must be positive") {
  const GridSpec spec = GridSpec::for_slide(64, 64, 16);
  CHECK_THROWS_AS(build_density_grid(GazeTrace{}, 0.0, spec), ValidationError);
  CHECK_THROWS_AS(build_density_grid(GazeTrace{}, -3.0, spec), ValidationError);
}

TEST_CASE("matches the brute-force oracle on random traces") {
  SeededRng rng(555);
  for (int round = 0; round < 10; ++round) {
    const int ds = 1 + static_cast<int>(rng.uniform_int(0, 3));
    const GridSpec spec = GridSpec::for_slide(rng.uniform_int(16, 100) * ds,
                                              rng.uniform_int(16, 100) * ds, ds);
    GazeTrace trace;
    const int count = static_cast<int>(rng.uniform_int(0, 150));
    for (int i = 0; i < count; ++i)
      trace.points.push_back(TracePoint{rng.uniform(0, static_cast<double>(spec.slide_width)),
                                        rng.uniform(0, static_cast<double>(spec.slide_height)),
                                        i * 16.0});
    const double sigma = rng.uniform(2.0, 80.0);
    const DensityGrid fast = build_density_grid(trace, sigma, spec);
    const DensityGrid slow = brute_force_density(trace, sigma, spec);
    for (std::size_t i = 0; i < fast.values.size(); ++i)
      CHECK(std::abs(fast.values[i] - slow.values[i]) <= 1e-9);
  }
}

TEST_CASE("grid construction is thread-count agnostic") {
  const GridSpec spec = GridSpec::for_slide(3200, 3200, 16);
  SeededRng rng(99);
  GazeTrace trace;
  for (int i = 0; i < 300; ++i)
    trace.points.push_back(TracePoint{rng.uniform(0, 3200), rng.uniform(0, 3200), i * 16.0});
  const DensityGrid a = build_density_grid(trace, 120.0, spec, 1);
  const DensityGrid b = build_density_grid(trace, 120.0, spec, 7);
  CHECK(a.values == b.values);
}

TEST_CASE("density is additive over trace concatenation") {
  const GridSpec spec = GridSpec::for_slide(1600, 1600, 16);
  SeededRng rng(11);

  // Exact case: coincident points at cell centers sum to small integers.
  GazeTrace centered;
  for (int i = 0; i < 6; ++i)
    centered.points.push_back(TracePoint{spec.center_x(20), spec.center_y(30), i * 16.0});
  GazeTrace first{{centered.points.begin(), centered.points.begin() + 3}};
  GazeTrace second{{centered.points.begin() + 3, centered.points.end()}};
  const DensityGrid whole = build_density_grid(centered, 40.0, spec);
  const DensityGrid g1 = build_density_grid(first, 40.0, spec);
  const DensityGrid g2 = build_density_grid(second, 40.0, spec);
  CHECK(whole.at(20, 30) == g1.at(20, 30) + g2.at(20, 30));

  // General case, up to floating-point reassociation.
  GazeTrace a, b, ab;
  for (int i = 0; i < 40; ++i) {
    const TracePoint p{rng.uniform(0, 1600), rng.uniform(0, 1600), i * 16.0};
    (i < 20 ? a : b).points.push_back(p);
    ab.points.push_back(p);
  }
  const DensityGrid ga = build_density_grid(a, 60.0, spec);
  const DensityGrid gb = build_density_grid(b, 60.0, spec);
  const DensityGrid gab = build_density_grid(ab, 60.0, spec);
  for (std::size_t i = 0; i < gab.values.size(); ++i)
    CHECK(gab.values[i] == doctest::Approx(ga.values[i] + gb.values[i]).epsilon(1e-12));
}

TEST_CASE("cluster extraction on point fixtures") {
  const GridSpec spec = GridSpec::for_slide(3200, 3200, 16);
  const double sigma = 64.0;

  SUBCASE("a single point yields one cluster") {
    const auto grid = build_density_grid(trace_of({{1600, 1600}}), sigma, spec);
    CHECK(extract_clusters(grid).size() == 1);
  }
  SUBCASE("points 10 sigma apart yield two clusters") {
    const auto grid = build_density_grid(trace_of({{800, 800}, {800 + 10 * sigma, 800}}), sigma, spec);
    CHECK(extract_clusters(grid).size() == 2);
  }
  SUBCASE("points one sigma apart share a cluster") {
    const auto grid = build_density_grid(trace_of({{800, 800}, {800 + sigma, 800}}), sigma, spec);
    CHECK(extract_clusters(grid).size() == 1);
  }
}

TEST_CASE("clusters report bin counts and means, sorted by size") {
  const GridSpec spec = GridSpec::for_slide(160, 16, 16);  // 10x1 cells
  DensityGrid grid(spec);
  grid.at(0, 0) = 2.0;
  grid.at(1, 0) = 2.0;
  grid.at(5, 0) = 8.0;
  grid.at(6, 0) = 2.0;
  grid.at(7, 0) = 2.0;
  const auto clusters = extract_clusters(grid);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].bin_count == 3);  // bigger cluster first
  CHECK(clusters[0].theta_bar == doctest::Approx(4.0));
  CHECK(clusters[1].bin_count == 2);
  CHECK(clusters[1].theta_bar == doctest::Approx(2.0));
  CHECK(extract_clusters(DensityGrid(spec)).empty());
}

TEST_CASE("threshold statistics fixtures") {
  const GridSpec spec = GridSpec::for_slide(160, 16, 16);

  SUBCASE("uniform cluster collapses tau to n") {
    DensityGrid grid(spec);
    grid.at(2, 0) = 3.0;
    grid.at(3, 0) = 3.0;
    const auto clusters = extract_clusters(grid);
    const ThresholdStats stats = compute_threshold(clusters, grid, 5.0);
    CHECK(stats.theta_bar == 3.0);
    CHECK(stats.max_bin == 3.0);
    CHECK(stats.tau == 5.0);
    CHECK(stats.cluster_count == 1);
  }

  SUBCASE("two clusters with means 2 and 4, max 8, n 2") {
    DensityGrid grid(spec);
    grid.at(0, 0) = 2.0;
    grid.at(1, 0) = 2.0;
    grid.at(5, 0) = 8.0;
    grid.at(6, 0) = 2.0;
    grid.at(7, 0) = 2.0;
    const auto clusters = extract_clusters(grid);
    const ThresholdStats stats = compute_threshold(clusters, grid, 2.0);
    CHECK(stats.theta_bar == 3.0);
    CHECK(stats.max_bin == 8.0);
    CHECK(stats.tau == 0.75);
  }

  SUBCASE("errors") {
    DensityGrid grid(spec);
    CHECK_THROWS_WITH_AS(compute_threshold({}, grid, 2.0), doctest::Contains("no gaze clusters"),
                         ValidationError);
    grid.at(0, 0) = 1.0;
    CHECK_THROWS_AS(compute_threshold(extract_clusters(grid), grid, 0.0), ValidationError);
  }
}

TEST_CASE("thresholding fixtures") {
  const GridSpec spec = GridSpec::for_slide(3200, 3200, 16);
  const auto grid = build_density_grid(trace_of({{1600, 1600}}), 64.0, spec);

  SUBCASE("tau 0 selects exactly the positive support") {
    const BinaryMask mask = threshold_to_mask(grid, 0.0);
    for (std::size_t i = 0; i < grid.values.size(); ++i)
      CHECK(static_cast<bool>(mask.bits[i]) == (grid.values[i] > 0.0));
  }
  SUBCASE("tau above the maximum empties the mask") {
    const BinaryMask mask = threshold_to_mask(grid, 1.5);
    CHECK(mask.set_count() == 0);
  }
  SUBCASE("tau 0.5 cuts a unit-peak kernel at radius sigma*sqrt(2 ln 2)") {
    const GridSpec fine = GridSpec::for_slide(128, 128, 1);
    const double sigma = 25.0;
    GazeTrace t;
    t.points.push_back(TracePoint{fine.center_x(64), fine.center_y(64), 0.0});
    const BinaryMask mask = threshold_to_mask(build_density_grid(t, sigma, fine), 0.5);
    int max_dx = 0, max_dy = 0;
    for (int cx = 0; cx < fine.width_cells; ++cx)
      if (mask.test(cx, 64)) max_dx = std::max(max_dx, std::abs(cx - 64));
    for (int cy = 0; cy < fine.height_cells; ++cy)
      if (mask.test(64, cy)) max_dy = std::max(max_dy, std::abs(cy - 64));
    const double analytic = sigma * std::sqrt(2.0 * std::log(2.0));  // 29.4352...
    CHECK(std::abs(max_dx - analytic) <= 1.0);
    CHECK(std::abs(max_dy - analytic) <= 1.0);
  }
}

TEST_CASE("threshold monotonicity: higher tau shrinks the mask") {
  const GridSpec spec = GridSpec::for_slide(3200, 3200, 16);
  SeededRng rng(31);
  GazeTrace trace;
  for (int i = 0; i < 80; ++i)
    trace.points.push_back(TracePoint{rng.uniform(400, 2800), rng.uniform(400, 2800), i * 16.0});
  const auto grid = build_density_grid(trace, 100.0, spec);
  const double taus[] = {0.1, 0.5, 1.0, 2.0, 5.0};
  for (std::size_t i = 1; i < std::size(taus); ++i) {
    const BinaryMask lo = threshold_to_mask(grid, taus[i - 1]);
    const BinaryMask hi = threshold_to_mask(grid, taus[i]);
    for (std::size_t c = 0; c < lo.bits.size(); ++c)
      if (hi.bits[c]) CHECK(lo.bits[c]);  // mask(tau2) subset of mask(tau1)
  }
}

TEST_CASE("adaptive mask is invariant under intensity scaling") {
  const GridSpec spec = GridSpec::for_slide(3200, 3200, 16);
  SeededRng rng(77);
  GazeTrace trace;
  for (int i = 0; i < 60; ++i)
    trace.points.push_back(TracePoint{rng.uniform(200, 3000), rng.uniform(200, 3000), i * 16.0});
  DensityGrid grid = build_density_grid(trace, 90.0, spec);

  const auto clusters = extract_clusters(grid);
  const ThresholdStats stats = compute_threshold(clusters, grid, 4.0);
  const BinaryMask base = threshold_to_mask(grid, stats.cutoff());

  for (const double k : {0.001, 0.5, 42.0, 1e6}) {
    DensityGrid scaled = grid;
    for (auto& v : scaled.values) v *= k;
    const auto scaled_clusters = extract_clusters(scaled);
    const ThresholdStats scaled_stats = compute_threshold(scaled_clusters, scaled, 4.0);
    CHECK(scaled_stats.tau == doctest::Approx(stats.tau).epsilon(1e-12));
    const BinaryMask mask = threshold_to_mask(scaled, scaled_stats.cutoff());
    CHECK(mask.bits == base.bits);
  }
}

TEST_CASE("cluster count is non-increasing in sigma") {
  const GridSpec spec = GridSpec::for_slide(6400, 6400, 16);
  SeededRng rng(123);
  for (int round = 0; round < 5; ++round) {
    GazeTrace trace;
    for (int f = 0; f < 6; ++f) {
      const double cx = rng.uniform(600, 5800);
      const double cy = rng.uniform(600, 5800);
      for (int i = 0; i < 15; ++i)
        trace.points.push_back(
            TracePoint{cx + rng.gaussian(0, 30), cy + rng.gaussian(0, 30), i * 16.0});
    }
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (const double sigma : {40.0, 80.0, 160.0, 320.0, 640.0, 1280.0}) {
      const auto clusters = extract_clusters(build_density_grid(trace, sigma, spec));
      CHECK(clusters.size() <= prev);
      prev = clusters.size();
    }
  }
}

TEST_CASE("two fixations merge into one cluster once supports touch") {
  const GridSpec spec = GridSpec::for_slide(6400, 6400, 16);
  const double d = 1200.0;
  const GazeTrace trace = trace_of({{2000, 3200}, {2000 + d, 3200}});
  // Supports overlap when d <= 2 * 3 sigma.
  const auto far_apart = extract_clusters(build_density_grid(trace, d / 8.0, spec));
  CHECK(far_apart.size() == 2);
  const auto touching = extract_clusters(build_density_grid(trace, d / 5.0, spec));
  CHECK(touching.size() == 1);
}

TEST_CASE("merge_masks fixtures") {
  const GridSpec spec = GridSpec::for_slide(320, 320, 16);
  BinaryMask a(spec), empty(spec);
  for (int i = 0; i < 10; ++i) a.set(i, 2);

  SUBCASE("empty is the identity element") { CHECK(merge_masks(a, empty) == a); }
  SUBCASE("idempotent") { CHECK(merge_masks(a, a) == a); }
  SUBCASE("disjoint masks add their cells") {
    BinaryMask b(spec);
    for (int i = 0; i < 20; ++i) b.set(i, 10);
    CHECK(merge_masks(a, b).set_count() == 30);
  }
  SUBCASE("mismatched specs are rejected") {
    BinaryMask other(GridSpec::for_slide(160, 320, 16));
    CHECK_THROWS_AS(merge_masks(a, other), ValidationError);
  }
}

TEST_CASE("pipeline with one sigma equals the op composition") {
  const GridSpec spec = GridSpec::for_slide(6400, 6400, 16);
  SeededRng rng(2024);
  GazeTrace trace;
  for (int i = 0; i < 120; ++i)
    trace.points.push_back(TracePoint{rng.uniform(500, 5900), rng.uniform(500, 5900), i * 16.0});

  const double sigma = 150.0;
  const double n = 4.0;
  const BinaryMask from_pipeline = run_kde_pipeline(trace, std::vector<double>{sigma}, n, spec);

  const DensityGrid grid = build_density_grid(trace, sigma, spec);
  const auto clusters = extract_clusters(grid);
  const ThresholdStats stats = compute_threshold(clusters, grid, n);
  const BinaryMask composed = threshold_to_mask(grid, stats.cutoff());
  CHECK(from_pipeline == composed);
}

TEST_CASE("pipeline edge cases") {
  const GridSpec spec = GridSpec::for_slide(640, 640, 16);
  SUBCASE("empty trace gives an empty mask, not an error") {
    const auto result = run_kde_pipeline_report(GazeTrace{}, std::vector<double>{50.0}, 5.0, spec);
    CHECK(result.mask.set_count() == 0);
    REQUIRE(result.passes.size() == 1);
    CHECK(result.passes[0].cluster_count == 0);
    CHECK_FALSE(result.passes[0].threshold.has_value());
  }
  SUBCASE("parameter errors propagate") {
    CHECK_THROWS_AS(run_kde_pipeline(GazeTrace{}, std::vector<double>{}, 5.0, spec), ValidationError);
    CHECK_THROWS_AS(run_kde_pipeline(GazeTrace{}, std::vector<double>{-1.0}, 5.0, spec),
                    ValidationError);
    CHECK_THROWS_AS(run_kde_pipeline(GazeTrace{}, std::vector<double>{50.0}, 0.0, spec),
                    ValidationError);
  }
}
