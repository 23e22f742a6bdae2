#include "gazelabel/timing.hpp"

#include <algorithm>

#include "gazelabel/errors.hpp"

namespace gazelabel {

std::string to_string(AnnotationMethod m) {
  switch (m) {
    case AnnotationMethod::freehand: return "freehand";
    case AnnotationMethod::bbox: return "bbox";
    case AnnotationMethod::gaze: return "gaze";
  }
  return "unknown";
}

AnnotationMethod annotation_method_from_string(const std::string& s) {
  if (s == "freehand") return AnnotationMethod::freehand;
  if (s == "bbox") return AnnotationMethod::bbox;
  if (s == "gaze") return AnnotationMethod::gaze;
  throw ValidationError("unknown annotation method: " + s);
}

TimingReport timing_report(std::span<const TimingRecord> records) {
  if (records.empty()) throw ValidationError("no timing records");

  struct Tally {
    double seconds = 0.0;
    std::int64_t labels = 0;
  };
  std::map<AnnotationMethod, std::map<std::string, Tally>> tallies;
  for (const auto& rec : records) {
    if (rec.label_count <= 0) throw ValidationError("label count must be > 0");
    if (rec.total_seconds < 0.0) throw ValidationError("total seconds must be >= 0");
    auto& t = tallies[rec.method][rec.annotator];
    t.seconds += rec.total_seconds;
    t.labels += rec.label_count;
  }

  TimingReport report;
  for (const auto& [method, per_annotator] : tallies) {
    MethodTiming mt;
    double sum_averages = 0.0;
    double total_seconds = 0.0;
    std::int64_t total_labels = 0;
    for (const auto& [annotator, tally] : per_annotator) {
      const double avg = tally.seconds / static_cast<double>(tally.labels);
      mt.per_annotator.emplace_back(annotator, avg);
      sum_averages += avg;
      total_seconds += tally.seconds;
      total_labels += tally.labels;
    }
    mt.mean_of_annotator_averages = sum_averages / static_cast<double>(per_annotator.size());
    mt.pooled_average = total_seconds / static_cast<double>(total_labels);
    report.methods.emplace(method, std::move(mt));
  }
  return report;
}

std::optional<double> TimingReport::gaze_savings_vs(AnnotationMethod other) const {
  const auto gaze_it = methods.find(AnnotationMethod::gaze);
  const auto other_it = methods.find(other);
  if (gaze_it == methods.end() || other_it == methods.end()) return std::nullopt;
  return 1.0 - gaze_it->second.mean_of_annotator_averages /
                   other_it->second.mean_of_annotator_averages;
}

}  // namespace gazelabel
