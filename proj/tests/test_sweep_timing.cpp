#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "gazelabel/density.hpp"
#include "gazelabel/mask_ops.hpp"
#include "gazelabel/session.hpp"
#include "gazelabel/simulate.hpp"
#include "gazelabel/sweep.hpp"
#include "gazelabel/timing.hpp"

using namespace gazelabel;

namespace {

SweepInput make_input(std::uint64_t seed, const std::string& id) {
  const SlideGeometry geometry{16000, 16000, 0.4952, 1920, 1080};
  const GridSpec grid = GridSpec::for_slide(16000, 16000, 16);
  const GTScene scene = generate_scene(4, {200, 600}, geometry, grid, seed);
  SimParams params;
  params.seed = seed ^ 0xABCDEF;
  SweepInput input;
  input.id = id;
  input.trace = project_trace(simulate_trace(scene, params));
  input.gt_mask = scene.gt_mask;
  return input;
}

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

TEST_CASE("single-cell sweep equals the direct pipeline score") {
  const std::vector<SweepInput> inputs{make_input(5, "a"), make_input(6, "b")};
  const double sigma = 250.0;
  const double n = 5.0;
  const SweepResult result =
      param_sweep(inputs, std::vector<double>{sigma}, std::vector<double>{n}, 1);
  REQUIRE(result.cells.size() == 1);

  std::vector<double> direct;
  for (const auto& input : inputs) {
    const BinaryMask mask =
        run_kde_pipeline(input.trace, std::vector<double>{sigma}, n, input.gt_mask.spec);
    direct.push_back(mask_iou(input.gt_mask, mask));
  }
  const MIOUSummary expected = miou_summary(direct);
  CHECK(result.cells[0].miou.mean == expected.mean);
  CHECK(result.cells[0].miou.std_dev == expected.std_dev);
  CHECK(result.cells[0].miou.count == 2);
}

TEST_CASE("ground truth equal to the pipeline output scores 1.0 everywhere") {
  const std::vector<double> sigmas{150.0, 300.0};
  const std::vector<double> ns{3.0};
  std::vector<SweepInput> inputs;
  for (std::uint64_t seed : {11ull, 12ull}) {
    SweepInput input = make_input(seed, "x");
    // Replace the ground truth by the pipeline's own output for one cell.
    input.gt_mask = run_kde_pipeline(input.trace, std::vector<double>{sigmas[0]}, ns[0],
                                     input.gt_mask.spec);
    inputs.push_back(std::move(input));
  }
  const SweepResult result = param_sweep(inputs, sigmas, ns, 1);
  CHECK(result.cell(0, 0).miou.mean == 1.0);
  CHECK(result.cell(0, 0).miou.std_dev == 0.0);
  CHECK(result.best_sigma_index == 0);
  CHECK(result.best_n_index == 0);
}

TEST_CASE("sweep grid is complete and thread-count agnostic") {
  const std::vector<SweepInput> inputs{make_input(21, "a"), make_input(22, "b"),
                                       make_input(23, "c")};
  const std::vector<double> sigmas{100.0, 200.0, 400.0};
  const std::vector<double> ns{1.0, 5.0};
  const SweepResult serial = param_sweep(inputs, sigmas, ns, 1);
  const SweepResult parallel = param_sweep(inputs, sigmas, ns, 8);

  REQUIRE(serial.cells.size() == sigmas.size() * ns.size());
  REQUIRE(serial.cluster_counts.size() == sigmas.size());
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    CHECK(serial.cluster_counts[si].size() == inputs.size());
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      CHECK(serial.cell(si, ni).miou.count == inputs.size());
      CHECK(serial.cell(si, ni).miou.mean == parallel.cell(si, ni).miou.mean);
      CHECK(serial.cell(si, ni).miou.std_dev == parallel.cell(si, ni).miou.std_dev);
    }
  }
  CHECK(serial.best_sigma_index == parallel.best_sigma_index);
  CHECK(serial.best_n_index == parallel.best_n_index);

  REQUIRE(serial.best_cell_scores.size() == inputs.size());
  const auto& best = serial.cell(serial.best_sigma_index, serial.best_n_index);
  double sum = 0.0;
  for (const auto& score : serial.best_cell_scores) sum += score.iou;
  CHECK(sum / inputs.size() == doctest::Approx(best.miou.mean).epsilon(1e-12));
  CHECK(serial.best_cell_scores[0].hand_id == "a:gt");
  CHECK(serial.best_cell_scores[0].gaze_id == "a:kde");
}

TEST_CASE("sweep validates its inputs") {
  CHECK_THROWS_AS(param_sweep({}, std::vector<double>{100.0}, std::vector<double>{1.0}),
                  ValidationError);
  const std::vector<SweepInput> inputs{make_input(31, "a")};
  CHECK_THROWS_AS(param_sweep(inputs, std::vector<double>{}, std::vector<double>{1.0}),
                  ValidationError);
  CHECK_THROWS_AS(param_sweep(inputs, std::vector<double>{-5.0}, std::vector<double>{1.0}),
                  ValidationError);
  CHECK_THROWS_AS(param_sweep(inputs, std::vector<double>{100.0}, std::vector<double>{0.0}),
                  ValidationError);
}

TEST_CASE("timing report reproduces the published annotation-time table") {
  const std::vector<TimingRecord> records{
      {"A", AnnotationMethod::freehand, 692, 50}, {"B", AnnotationMethod::freehand, 924, 50},
      {"A", AnnotationMethod::bbox, 290, 50},     {"B", AnnotationMethod::bbox, 281, 50},
      {"A", AnnotationMethod::gaze, 109, 50},     {"B", AnnotationMethod::gaze, 133, 50},
  };
  const TimingReport report = timing_report(records);

  const auto& freehand = report.methods.at(AnnotationMethod::freehand);
  const auto& bbox = report.methods.at(AnnotationMethod::bbox);
  const auto& gaze = report.methods.at(AnnotationMethod::gaze);

  CHECK(freehand.per_annotator[0].second == doctest::Approx(13.84).epsilon(1e-12));
  CHECK(freehand.per_annotator[1].second == doctest::Approx(18.48).epsilon(1e-12));
  CHECK(two_decimals(freehand.mean_of_annotator_averages) == "16.16");
  CHECK(two_decimals(bbox.mean_of_annotator_averages) == "5.71");
  CHECK(two_decimals(gaze.mean_of_annotator_averages) == "2.42");

  // Equal label counts make the pooled and per-annotator means agree.
  CHECK(bbox.pooled_average == doctest::Approx(5.71).epsilon(1e-12));

  const auto vs_bbox = report.gaze_savings_vs(AnnotationMethod::bbox);
  const auto vs_freehand = report.gaze_savings_vs(AnnotationMethod::freehand);
  REQUIRE(vs_bbox.has_value());
  REQUIRE(vs_freehand.has_value());
  CHECK(std::round(*vs_bbox * 1000) / 10 == 57.6);
  CHECK(std::round(*vs_freehand * 100) == 85.0);
}

TEST_CASE("pooled and per-annotator averages differ for uneven label counts") {
  const std::vector<TimingRecord> records{
      {"A", AnnotationMethod::gaze, 100, 100},  // 1 s per label
      {"B", AnnotationMethod::gaze, 30, 10},    // 3 s per label
  };
  const auto& gaze = timing_report(records).methods.at(AnnotationMethod::gaze);
  CHECK(gaze.mean_of_annotator_averages == doctest::Approx(2.0));
  CHECK(gaze.pooled_average == doctest::Approx(130.0 / 110.0));
}

TEST_CASE("repeated records for one annotator accumulate") {
  const std::vector<TimingRecord> records{
      {"A", AnnotationMethod::gaze, 60, 20},
      {"A", AnnotationMethod::gaze, 40, 30},
  };
  const auto& gaze = timing_report(records).methods.at(AnnotationMethod::gaze);
  REQUIRE(gaze.per_annotator.size() == 1);
  CHECK(gaze.per_annotator[0].second == doctest::Approx(2.0));
}

TEST_CASE("timing validation") {
  CHECK_THROWS_AS(timing_report({}), ValidationError);
  const std::vector<TimingRecord> zero_labels{{"A", AnnotationMethod::gaze, 10, 0}};
  CHECK_THROWS_AS(timing_report(zero_labels), ValidationError);
  CHECK_THROWS_AS(annotation_method_from_string("pencil"), ValidationError);
  CHECK(annotation_method_from_string("bbox") == AnnotationMethod::bbox);
  CHECK(to_string(AnnotationMethod::freehand) == "freehand");

  // Savings are absent when a method is missing.
  const std::vector<TimingRecord> only_gaze{{"A", AnnotationMethod::gaze, 10, 5}};
  CHECK_FALSE(timing_report(only_gaze).gaze_savings_vs(AnnotationMethod::bbox).has_value());
}
