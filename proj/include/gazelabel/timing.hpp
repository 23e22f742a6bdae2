#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gazelabel {

enum class AnnotationMethod { freehand, bbox, gaze };

std::string to_string(AnnotationMethod m);
AnnotationMethod annotation_method_from_string(const std::string& s);

struct TimingRecord {
  std::string annotator;
  AnnotationMethod method = AnnotationMethod::gaze;
  double total_seconds = 0.0;
  std::int64_t label_count = 0;
};

struct MethodTiming {
  // Per-annotator seconds-per-label, sorted by annotator id.
  std::vector<std::pair<std::string, double>> per_annotator;
  // Mean of the per-annotator averages (the headline number).
  double mean_of_annotator_averages = 0.0;
  // Total seconds over total labels; differs from the above when annotators
  // labelled different amounts.
  double pooled_average = 0.0;
};

struct TimingReport {
  std::map<AnnotationMethod, MethodTiming> methods;

  // 1 - gaze_average / other_average, using the mean of annotator averages.
  // Empty when either method is missing.
  std::optional<double> gaze_savings_vs(AnnotationMethod other) const;
};

TimingReport timing_report(std::span<const TimingRecord> records);

}  // namespace gazelabel
