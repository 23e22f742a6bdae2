#include "gazelabel/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace gazelabel {

namespace {

using nlohmann::json;

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw ValidationError("line " + std::to_string(line) + ": " + what);
}

double get_number(const json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) fail_line(line, std::string("missing numeric field '") + key + "'");
  const double v = it->get<double>();
  if (!std::isfinite(v)) fail_line(line, std::string("non-finite value for '") + key + "'");
  return v;
}

bool all_whitespace(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

GazeSession parse_session(std::istream& in, ParseStats* stats) {
  GazeSession session;
  ParseStats local;
  bool meta_seen = false;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || all_whitespace(line)) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail_line(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) fail_line(line_no, "record is not a JSON object");

    const auto kind_it = j.find("kind");
    if (kind_it == j.end() || !kind_it->is_string()) fail_line(line_no, "missing 'kind'");
    const std::string kind = kind_it->get<std::string>();

    if (kind == "meta") {
      if (meta_seen) fail_line(line_no, "duplicate meta record");
      if (!session.samples.empty() || !session.viewport_events.empty())
        fail_line(line_no, "meta record must come first");
      session.geometry.slide_width = static_cast<std::int64_t>(get_number(j, "slide_width", line_no));
      session.geometry.slide_height = static_cast<std::int64_t>(get_number(j, "slide_height", line_no));
      session.geometry.mpp = get_number(j, "mpp", line_no);
      session.geometry.screen_width = static_cast<std::int64_t>(get_number(j, "screen_width", line_no));
      session.geometry.screen_height = static_cast<std::int64_t>(get_number(j, "screen_height", line_no));
      try {
        session.geometry.validate();
      } catch (const ValidationError& e) {
        fail_line(line_no, e.what());
      }
      meta_seen = true;
    } else if (kind == "gaze") {
      if (!meta_seen) fail_line(line_no, "gaze record before meta record");
      GazeSample s;
      s.t_ms = get_number(j, "t_ms", line_no);
      if (s.t_ms < 0.0) fail_line(line_no, "t_ms must be >= 0");
      s.x = get_number(j, "x", line_no);
      s.y = get_number(j, "y", line_no);
      s.valid = j.value("valid", true);
      session.samples.push_back(s);
    } else if (kind == "viewport") {
      if (!meta_seen) fail_line(line_no, "viewport record before meta record");
      ViewportEvent v;
      v.t_ms = get_number(j, "t_ms", line_no);
      if (v.t_ms < 0.0) fail_line(line_no, "t_ms must be >= 0");
      v.offset_x = get_number(j, "offset_x", line_no);
      v.offset_y = get_number(j, "offset_y", line_no);
      v.scale = get_number(j, "scale", line_no);
      if (v.scale <= 0.0) fail_line(line_no, "viewport scale must be > 0");
      session.viewport_events.push_back(v);
    } else {
      ++local.unknown_records;
    }
  }

  if (!meta_seen) throw ValidationError("missing meta record");

  const auto by_time = [](const auto& a, const auto& b) { return a.t_ms < b.t_ms; };
  if (!std::is_sorted(session.samples.begin(), session.samples.end(), by_time)) {
    std::stable_sort(session.samples.begin(), session.samples.end(), by_time);
    local.samples_reordered = true;
  }
  if (!std::is_sorted(session.viewport_events.begin(), session.viewport_events.end(), by_time)) {
    std::stable_sort(session.viewport_events.begin(), session.viewport_events.end(), by_time);
    local.viewports_reordered = true;
  }

  if (stats) *stats = local;
  return session;
}

GazeSession parse_session_file(const std::filesystem::path& path, ParseStats* stats) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open session file: " + path.string());
  try {
    return parse_session(in, stats);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void serialize_session(const GazeSession& session, std::ostream& out) {
  json meta{{"kind", "meta"},
            {"slide_width", session.geometry.slide_width},
            {"slide_height", session.geometry.slide_height},
            {"mpp", session.geometry.mpp},
            {"screen_width", session.geometry.screen_width},
            {"screen_height", session.geometry.screen_height}};
  out << meta.dump() << '\n';

  // Chronological interleave; a viewport event is written before any sample
  // that shares its timestamp since it governs that sample.
  std::size_t si = 0;
  std::size_t vi = 0;
  while (si < session.samples.size() || vi < session.viewport_events.size()) {
    const bool take_viewport =
        vi < session.viewport_events.size() &&
        (si >= session.samples.size() ||
         session.viewport_events[vi].t_ms <= session.samples[si].t_ms);
    if (take_viewport) {
      const auto& v = session.viewport_events[vi++];
      json rec{{"kind", "viewport"}, {"t_ms", v.t_ms},   {"offset_x", v.offset_x},
               {"offset_y", v.offset_y}, {"scale", v.scale}};
      out << rec.dump() << '\n';
    } else {
      const auto& s = session.samples[si++];
      json rec{{"kind", "gaze"}, {"t_ms", s.t_ms}, {"x", s.x}, {"y", s.y}, {"valid", s.valid}};
      out << rec.dump() << '\n';
    }
  }
}

void write_session_file(const GazeSession& session, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write session file: " + path.string());
  serialize_session(session, out);
  if (!out) throw IoError("failed while writing session file: " + path.string());
}

SlidePoint screen_to_slide(const GazeSample& sample, const ViewportEvent& vp) {
  return SlidePoint{vp.offset_x + sample.x * vp.scale, vp.offset_y + sample.y * vp.scale};
}

SlidePoint slide_to_screen(const SlidePoint& p, const ViewportEvent& vp) {
  return SlidePoint{(p.x - vp.offset_x) / vp.scale, (p.y - vp.offset_y) / vp.scale};
}

GazeTrace project_trace(const GazeSession& session, ProjectionStats* stats) {
  if (session.viewport_events.empty()) throw ValidationError("no viewport state");
  session.geometry.validate();

  ProjectionStats local;
  GazeTrace trace;
  trace.points.reserve(session.samples.size());

  const auto& events = session.viewport_events;
  std::size_t active = 0;  // index of the event governing the current sample

  for (const auto& sample : session.samples) {
    if (sample.t_ms < events.front().t_ms) {
      ++local.dropped_before_viewport;
      continue;
    }
    while (active + 1 < events.size() && events[active + 1].t_ms <= sample.t_ms) ++active;
    if (!sample.valid) {
      ++local.dropped_invalid;
      continue;
    }
    const SlidePoint p = screen_to_slide(sample, events[active]);
    if (p.x < 0.0 || p.y < 0.0 || p.x >= static_cast<double>(session.geometry.slide_width) ||
        p.y >= static_cast<double>(session.geometry.slide_height)) {
      ++local.dropped_out_of_bounds;
      continue;
    }
    trace.points.push_back(TracePoint{p.x, p.y, sample.t_ms});
  }

  if (stats) *stats = local;
  return trace;
}

}  // namespace gazelabel
