#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "gazelabel/geometry.hpp"

namespace gazelabel {

struct GazeSample {
  double t_ms = 0.0;  // since session start
  double x = 0.0;     // screen px
  double y = 0.0;
  bool valid = true;  // tracker confidence flag
};

// Pan/zoom state at one instant: slide = offset + screen * scale.
struct ViewportEvent {
  double t_ms = 0.0;
  double offset_x = 0.0;  // slide px of the screen origin
  double offset_y = 0.0;
  double scale = 1.0;     // slide px per screen px, > 0
};

struct GazeSession {
  SlideGeometry geometry;
  std::vector<GazeSample> samples;             // sorted by t_ms
  std::vector<ViewportEvent> viewport_events;  // sorted by t_ms
};

struct TracePoint {
  double x = 0.0;  // slide px
  double y = 0.0;
  double t_ms = 0.0;
};

// Gaze positions in slide space, in recording order, all inside the slide.
struct GazeTrace {
  std::vector<TracePoint> points;
};

struct ParseStats {
  std::size_t unknown_records = 0;
  bool samples_reordered = false;
  bool viewports_reordered = false;
};

// Reads the JSON-Lines session format: the first record must be the meta
// record; gaze and viewport records follow in any order and are sorted by
// timestamp on load (with a warning flag when reordering was needed).
// Unknown record kinds are skipped and counted.
GazeSession parse_session(std::istream& in, ParseStats* stats = nullptr);
GazeSession parse_session_file(const std::filesystem::path& path, ParseStats* stats = nullptr);

void serialize_session(const GazeSession& session, std::ostream& out);
void write_session_file(const GazeSession& session, const std::filesystem::path& path);

struct SlidePoint {
  double x = 0.0;
  double y = 0.0;
};

SlidePoint screen_to_slide(const GazeSample& sample, const ViewportEvent& vp);
// Algebraic inverse of screen_to_slide.
SlidePoint slide_to_screen(const SlidePoint& p, const ViewportEvent& vp);

struct ProjectionStats {
  std::size_t dropped_invalid = 0;
  std::size_t dropped_before_viewport = 0;
  std::size_t dropped_out_of_bounds = 0;
};

// Projects valid samples into slide space using the most recent viewport
// event at or before each sample's timestamp (step-function semantics).
// Samples that precede the first event, are flagged invalid, or land outside
// the slide are dropped and counted, never interpolated.
GazeTrace project_trace(const GazeSession& session, ProjectionStats* stats = nullptr);

}  // namespace gazelabel
