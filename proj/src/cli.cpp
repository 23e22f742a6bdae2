#include "gazelabel/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gazelabel/density.hpp"
#include "gazelabel/detection.hpp"
#include "gazelabel/errors.hpp"
#include "gazelabel/labels_io.hpp"
#include "gazelabel/mask_ops.hpp"
#include "gazelabel/rng.hpp"
#include "gazelabel/session.hpp"
#include "gazelabel/simulate.hpp"
#include "gazelabel/sweep.hpp"
#include "gazelabel/tiling.hpp"
#include "gazelabel/timing.hpp"

namespace gazelabel {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// Accepts "400", "100,200,400" and "0.10:0.95:0.05" (inclusive range).
// Values are snapped to 1e-9 so range arithmetic stays exact on decimal grids.
std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      values.push_back(std::stod(item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ValidationError("bad range syntax: " + item);
    const double lo = std::stod(item.substr(0, c1));
    const double hi = std::stod(item.substr(c1 + 1, c2 - c1 - 1));
    const double step = std::stod(item.substr(c2 + 1));
    if (step <= 0.0 || hi < lo) throw ValidationError("bad range: " + item);
    for (int k = 0;; ++k) {
      const double v = lo + k * step;
      if (v > hi + step * 1e-9) break;
      values.push_back(std::round(v * 1e9) / 1e9);
    }
  }
  if (values.empty()) throw ValidationError("empty value list: '" + text + "'");
  return values;
}

void require_out_dir(const std::string& out) {
  if (out.empty()) throw ValidationError("--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  std::string out;
  std::uint64_t seed = 1234;
  int scenes = 1;
  int roi_count = 5;
  double radius_min = 200.0;
  double radius_max = 600.0;
  std::int64_t slide_width = 40000;
  std::int64_t slide_height = 40000;
  double mpp = 0.4952;
  std::int64_t screen_width = 1920;
  std::int64_t screen_height = 1080;
  int downsample = 16;
  double rate = 60.0;
  double dwell_min = 1.0;
  double dwell_max = 2.0;
  double jitter = 0.35;
  int saccade_samples = 5;
  int distractors = 2;
  double distractor_dwell = 0.5;
  bool pan_zoom = false;
};

void cmd_simulate(const SimulateOpts& o) {
  if (o.scenes < 1) throw ValidationError("--scenes must be >= 1");
  require_out_dir(o.out);

  SlideGeometry geometry{o.slide_width, o.slide_height, o.mpp, o.screen_width, o.screen_height};
  const GridSpec grid = GridSpec::for_slide(o.slide_width, o.slide_height, o.downsample);

  for (int i = 0; i < o.scenes; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03d", i);
    const fs::path dir = fs::path(o.out) / name;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const std::uint64_t scene_seed = SeededRng::derive(o.seed, 2 * static_cast<std::uint64_t>(i));
    const std::uint64_t trace_seed = SeededRng::derive(o.seed, 2 * static_cast<std::uint64_t>(i) + 1);
    const GTScene scene =
        generate_scene(o.roi_count, {o.radius_min, o.radius_max}, geometry, grid, scene_seed);

    SimParams params;
    params.sample_rate_hz = o.rate;
    params.dwell_min_s = o.dwell_min;
    params.dwell_max_s = o.dwell_max;
    params.fixation_jitter = o.jitter;
    params.saccade_samples_per_transition = o.saccade_samples;
    params.distractor_fixations = o.distractors;
    params.distractor_dwell_s = o.distractor_dwell;
    params.pan_zoom_events = o.pan_zoom;
    params.seed = trace_seed;
    const GazeSession session = simulate_trace(scene, params);

    write_session_file(session, dir / "session.jsonl");
    write_mask_pgm(scene.gt_mask, dir / "gt_mask.pgm", dir / "gt_mask.json");

    std::vector<LabelRow> rows;
    for (const auto& box : scene.gt_boxes) rows.push_back(LabelRow{0, box, std::nullopt});
    write_label_file(dir / "gt_boxes.txt", rows, o.slide_width, o.slide_height);

    json rois = json::array();
    for (const auto& roi : scene.rois)
      rois.push_back({{"cx", roi.cx}, {"cy", roi.cy}, {"semi_x", roi.semi_x}, {"semi_y", roi.semi_y}});
    const json sidecar{{"scene_index", i},
                       {"scene_seed", scene_seed},
                       {"trace_seed", trace_seed},
                       {"base_seed", o.seed},
                       {"roi_count", o.roi_count},
                       {"radius_min", o.radius_min},
                       {"radius_max", o.radius_max},
                       {"slide_width", o.slide_width},
                       {"slide_height", o.slide_height},
                       {"mpp", o.mpp},
                       {"screen_width", o.screen_width},
                       {"screen_height", o.screen_height},
                       {"downsample", o.downsample},
                       {"sample_rate_hz", o.rate},
                       {"dwell_min_s", o.dwell_min},
                       {"dwell_max_s", o.dwell_max},
                       {"fixation_jitter", o.jitter},
                       {"saccade_samples_per_transition", o.saccade_samples},
                       {"distractor_fixations", o.distractors},
                       {"distractor_dwell_s", o.distractor_dwell},
                       {"pan_zoom_events", o.pan_zoom},
                       {"rois", rois},
                       {"samples", session.samples.size()}};
    write_json_file(dir / "scene.json", sidecar);
    std::cout << name << ": " << scene.rois.size() << " ROIs, " << session.samples.size()
              << " samples\n";
  }
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOpts {
  std::string session;
  std::string out;
  std::string format = "text";
};

void cmd_ingest(const IngestOpts& o) {
  if (o.session.empty()) throw ValidationError("--session is required");
  ParseStats pstats;
  const GazeSession session = parse_session_file(o.session, &pstats);
  ProjectionStats jstats;
  const GazeTrace trace = project_trace(session, &jstats);

  const json summary{{"samples", session.samples.size()},
                     {"viewport_events", session.viewport_events.size()},
                     {"projected_points", trace.points.size()},
                     {"dropped_invalid", jstats.dropped_invalid},
                     {"dropped_before_viewport", jstats.dropped_before_viewport},
                     {"dropped_out_of_bounds", jstats.dropped_out_of_bounds},
                     {"unknown_records", pstats.unknown_records},
                     {"samples_reordered", pstats.samples_reordered},
                     {"viewports_reordered", pstats.viewports_reordered}};

  if (!o.out.empty()) {
    require_out_dir(o.out);
    std::ostringstream csv;
    csv << "x,y,t_ms\n";
    char buf[96];
    for (const auto& p : trace.points) {
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.3f\n", p.x, p.y, p.t_ms);
      csv << buf;
    }
    write_text_file(fs::path(o.out) / "trace.csv", csv.str());
    write_json_file(fs::path(o.out) / "ingest_stats.json", summary);
  }

  if (o.format == "json") {
    std::cout << summary.dump(2) << "\n";
  } else {
    std::cout << "projected " << trace.points.size() << "/" << session.samples.size()
              << " samples (invalid " << jstats.dropped_invalid << ", before viewport "
              << jstats.dropped_before_viewport << ", out of bounds "
              << jstats.dropped_out_of_bounds << ", unknown records " << pstats.unknown_records
              << ")\n";
  }
}

// ---------------------------------------------------------------------------
// kde

struct KdeOpts {
  std::string session;
  std::string sigma = "400";
  double n = 5.0;
  int downsample = 16;
  int threads = 0;
  std::string out;
};

void cmd_kde(const KdeOpts& o) {
  if (o.session.empty()) throw ValidationError("--session is required");
  const std::vector<double> sigmas = parse_value_list(o.sigma);
  const GazeSession session = parse_session_file(o.session);
  const GazeTrace trace = project_trace(session);
  const GridSpec spec = GridSpec::for_slide(session.geometry.slide_width,
                                            session.geometry.slide_height, o.downsample);
  const KdePipelineResult result = run_kde_pipeline_report(trace, sigmas, o.n, spec, o.threads);

  json passes = json::array();
  for (const auto& pass : result.passes) {
    json p{{"sigma", pass.sigma}, {"clusters", pass.cluster_count}};
    if (pass.threshold) {
      p["theta_bar"] = pass.threshold->theta_bar;
      p["max_bin"] = pass.threshold->max_bin;
      p["tau"] = pass.threshold->tau;
      p["cutoff"] = pass.threshold->cutoff();
    }
    passes.push_back(p);
  }

  if (!o.out.empty()) {
    require_out_dir(o.out);
    write_mask_pgm(result.mask, fs::path(o.out) / "mask.pgm", fs::path(o.out) / "mask.json");
    write_json_file(fs::path(o.out) / "mask_rle.json", mask_to_rle_json(result.mask));
    write_json_file(fs::path(o.out) / "kde_stats.json",
                    json{{"n", o.n},
                         {"downsample", o.downsample},
                         {"points", trace.points.size()},
                         {"mask_cells", result.mask.set_count()},
                         {"passes", passes}});
  }

  for (const auto& pass : result.passes) {
    std::cout << "sigma " << pass.sigma << ": " << pass.cluster_count << " clusters";
    if (pass.threshold)
      std::cout << ", theta_bar " << fmt("%.4f", pass.threshold->theta_bar) << ", tau "
                << fmt("%.4f", pass.threshold->tau);
    std::cout << "\n";
  }
  std::cout << "mask: " << result.mask.set_count() << " cells set\n";
}

// ---------------------------------------------------------------------------
// boxes

struct BoxesOpts {
  std::string mask;
  std::int64_t min_area = -1;
  double confidence = -1.0;  // < 0 means plain ground-truth rows
  std::string out;
};

void cmd_boxes(const BoxesOpts& o) {
  if (o.mask.empty()) throw ValidationError("--mask is required");
  if (o.out.empty()) throw ValidationError("--out is required");
  fs::path sidecar = fs::path(o.mask);
  sidecar.replace_extension(".json");
  const BinaryMask mask = read_mask_pgm(o.mask, sidecar);
  const BoxExtraction extraction = mask_to_bboxes(mask, o.min_area);

  std::vector<LabelRow> rows;
  for (const auto& box : extraction.boxes) {
    LabelRow row{0, box, std::nullopt};
    if (o.confidence >= 0.0) row.confidence = o.confidence;
    rows.push_back(row);
  }
  write_label_file(o.out, rows, mask.spec.slide_width, mask.spec.slide_height);
  std::cout << extraction.boxes.size() << " boxes (" << extraction.discarded_small
            << " below min area)\n";
}

// ---------------------------------------------------------------------------
// tile

struct TileOpts {
  std::string labels;
  std::int64_t slide_width = 0;
  std::int64_t slide_height = 0;
  std::int64_t tile_size = 4000;
  std::int64_t overlap = 0;
  bool only_labeled = false;
  std::string out;
};

void cmd_tile(const TileOpts& o) {
  if (o.labels.empty()) throw ValidationError("--labels is required");
  if (o.slide_width <= 0 || o.slide_height <= 0)
    throw ValidationError("--slide-width and --slide-height are required");
  require_out_dir(o.out);

  const auto rows = read_label_file(o.labels, o.slide_width, o.slide_height);
  std::vector<BBox> boxes;
  for (const auto& row : rows) boxes.push_back(row.box);

  const TileSpec spec{o.tile_size, o.overlap, o.slide_width, o.slide_height};
  const auto per_tile = tile_labels(boxes, spec);
  const auto layout = tile_layout(spec);

  json manifest_tiles = json::array();
  std::size_t written = 0;
  for (const auto& tile : layout) {
    const auto it = per_tile.find(tile.id());
    const std::size_t count = it == per_tile.end() ? 0 : it->second.size();
    if (o.only_labeled && count == 0) continue;
    std::vector<LabelRow> tile_rows;
    if (it != per_tile.end())
      for (const auto& tb : it->second) tile_rows.push_back(LabelRow{0, tb.box, std::nullopt});
    write_label_file(fs::path(o.out) / (tile.id() + ".txt"), tile_rows, o.tile_size, o.tile_size);
    ++written;
    manifest_tiles.push_back(
        {{"id", tile.id()}, {"row", tile.row}, {"col", tile.col}, {"x", tile.x0}, {"y", tile.y0},
         {"labels", count}});
  }
  write_json_file(fs::path(o.out) / "manifest.json",
                  json{{"tile_size", o.tile_size},
                       {"overlap", o.overlap},
                       {"slide_width", o.slide_width},
                       {"slide_height", o.slide_height},
                       {"tiles", manifest_tiles}});
  std::cout << written << " tiles written, " << boxes.size() << " input boxes\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::string det;
  std::string gt;
  std::string ot;  // empty selects the default grid
  std::int64_t image_width = 4000;
  std::int64_t image_height = 4000;
  std::string out;
  std::string format = "text";
};

std::vector<std::pair<std::string, fs::path>> label_files(const std::string& root) {
  const fs::path p(root);
  std::vector<std::pair<std::string, fs::path>> files;
  if (fs::is_directory(p)) {
    for (const auto& entry : fs::directory_iterator(p))
      if (entry.is_regular_file() && entry.path().extension() == ".txt")
        files.emplace_back(entry.path().stem().string(), entry.path());
    std::sort(files.begin(), files.end());
  } else if (fs::exists(p)) {
    files.emplace_back(p.stem().string(), p);
  } else {
    throw IoError("no such file or directory: " + root);
  }
  return files;
}

void cmd_eval(const EvalOpts& o) {
  if (o.det.empty() || o.gt.empty()) throw ValidationError("--det and --gt are required");
  const auto gt_files = label_files(o.gt);
  if (gt_files.empty()) throw ValidationError("no ground-truth label files in " + o.gt);
  const auto det_files = label_files(o.det);

  std::map<std::string, std::int64_t> image_ids;
  GroundTruth gts;
  for (std::size_t i = 0; i < gt_files.size(); ++i) {
    image_ids[gt_files[i].first] = static_cast<std::int64_t>(i);
    std::vector<BBox> boxes;
    for (const auto& row : read_label_file(gt_files[i].second, o.image_width, o.image_height)) {
      if (row.confidence)
        throw ValidationError(gt_files[i].second.string() + ": ground truth must not carry confidence");
      boxes.push_back(row.box);
    }
    gts[static_cast<std::int64_t>(i)] = std::move(boxes);
  }

  // Two single files always describe the same image, whatever their names;
  // directories pair up by file stem.
  const bool single_pair = !fs::is_directory(o.det) && !fs::is_directory(o.gt);

  std::vector<Detection> dets;
  for (const auto& [stem, path] : det_files) {
    const auto it = single_pair ? image_ids.begin() : image_ids.find(stem);
    if (it == image_ids.end())
      throw ValidationError("detections for unknown image '" + stem + "' (" + path.string() + ")");
    for (const auto& row : read_label_file(path, o.image_width, o.image_height)) {
      if (!row.confidence)
        throw ValidationError(path.string() + ": detection rows must carry confidence");
      dets.push_back(Detection{it->second, row.box, *row.confidence});
    }
  }

  const std::vector<double> ots = o.ot.empty() ? default_ot_grid() : parse_value_list(o.ot);
  for (const double ot : ots)
    if (ot <= 0.0 || ot > 1.0) throw ValidationError("overlap thresholds must be in (0, 1]");
  const auto reports = ot_sweep(dets, gts, static_cast<std::int64_t>(gt_files.size()), ots);

  std::ostringstream eval_csv;
  eval_csv << "ot,ap,lamr,tp,fp,gt\n";
  json summary = json::array();
  for (const auto& r : reports) {
    eval_csv << fmt("%.2f", r.ot) << "," << fmt("%.6f", r.ap) << "," << fmt("%.6f", r.lamr) << ","
             << r.tp << "," << r.fp << "," << r.gt << "\n";
    json curve = json::array();
    for (std::size_t i = 0; i < r.pr_points.size(); ++i)
      curve.push_back({{"confidence", r.pr_points[i].confidence},
                       {"precision", r.pr_points[i].precision},
                       {"recall", r.pr_points[i].recall},
                       {"fppi", r.mr_points[i].fppi},
                       {"miss_rate", r.mr_points[i].miss_rate}});
    summary.push_back({{"ot", r.ot},
                       {"ap", r.ap},
                       {"map", r.ap},
                       {"lamr", r.lamr},
                       {"tp", r.tp},
                       {"fp", r.fp},
                       {"gt", r.gt},
                       {"curve", curve}});
  }

  if (!o.out.empty()) {
    require_out_dir(o.out);
    write_text_file(fs::path(o.out) / "eval.csv", eval_csv.str());
    write_json_file(fs::path(o.out) / "summary.json", summary);
    for (const auto& r : reports) {
      std::ostringstream curve_csv;
      curve_csv << "confidence,precision,recall,fppi,miss_rate\n";
      for (std::size_t i = 0; i < r.pr_points.size(); ++i) {
        curve_csv << fmt("%.6f", r.pr_points[i].confidence) << ","
                  << fmt("%.6f", r.pr_points[i].precision) << ","
                  << fmt("%.6f", r.pr_points[i].recall) << "," << fmt("%.6f", r.mr_points[i].fppi)
                  << "," << fmt("%.6f", r.mr_points[i].miss_rate) << "\n";
      }
      write_text_file(fs::path(o.out) / ("curve_ot" + fmt("%.2f", r.ot) + ".csv"),
                      curve_csv.str());
    }
  }

  if (o.format == "json") {
    std::cout << summary.dump(2) << "\n";
  } else if (o.format == "csv") {
    std::cout << eval_csv.str();
  } else {
    std::cout << "  OT    mAP       LAMR      TP    FP    GT\n";
    for (const auto& r : reports) {
      std::printf("%5.2f  %-8.6f  %-8.6f  %-4lld  %-4lld  %-4lld\n", r.ot, r.ap, r.lamr,
                  static_cast<long long>(r.tp), static_cast<long long>(r.fp),
                  static_cast<long long>(r.gt));
    }
  }
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOpts {
  std::string scenes;
  std::string sigma = "100,200,400,800";
  std::string n = "1,3,5,7,9";
  int threads = 0;
  std::string out;
  std::string format = "text";
};

void cmd_sweep(const SweepOpts& o) {
  if (o.scenes.empty()) throw ValidationError("--scenes is required");
  const std::vector<double> sigmas = parse_value_list(o.sigma);
  const std::vector<double> ns = parse_value_list(o.n);

  std::vector<fs::path> dirs;
  if (!fs::is_directory(o.scenes)) throw IoError("no such directory: " + o.scenes);
  for (const auto& entry : fs::directory_iterator(o.scenes))
    if (entry.is_directory() && fs::exists(entry.path() / "session.jsonl")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw ValidationError("no scene directories under " + o.scenes);

  std::vector<SweepInput> inputs;
  for (const auto& dir : dirs) {
    SweepInput input;
    input.id = dir.filename().string();
    const GazeSession session = parse_session_file(dir / "session.jsonl");
    input.trace = project_trace(session);
    input.gt_mask = read_mask_pgm(dir / "gt_mask.pgm", dir / "gt_mask.json");
    if (input.gt_mask.spec.slide_width != session.geometry.slide_width ||
        input.gt_mask.spec.slide_height != session.geometry.slide_height)
      throw ValidationError(dir.string() + ": mask and session disagree on slide size");
    inputs.push_back(std::move(input));
  }

  const SweepResult result = param_sweep(inputs, sigmas, ns, o.threads);

  std::ostringstream csv;
  csv << "sigma,n,mean_miou,std_miou,mean_clusters\n";
  for (std::size_t si = 0; si < sigmas.size(); ++si)
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      const auto& cell = result.cell(si, ni);
      csv << fmt("%g", sigmas[si]) << "," << fmt("%g", ns[ni]) << ","
          << fmt("%.6f", cell.miou.mean) << "," << fmt("%.6f", cell.miou.std_dev) << ","
          << fmt("%.3f", result.mean_clusters(si)) << "\n";
    }

  json cells = json::array();
  for (std::size_t si = 0; si < sigmas.size(); ++si)
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      const auto& cell = result.cell(si, ni);
      cells.push_back({{"sigma", sigmas[si]},
                       {"n", ns[ni]},
                       {"mean_miou", cell.miou.mean},
                       {"std_miou", cell.miou.std_dev},
                       {"count", cell.miou.count}});
    }
  json counts = json::array();
  for (std::size_t si = 0; si < sigmas.size(); ++si)
    counts.push_back({{"sigma", sigmas[si]}, {"per_scene", result.cluster_counts[si]}});
  const auto& best = result.cell(result.best_sigma_index, result.best_n_index);
  json best_pairs = json::array();
  for (const auto& score : result.best_cell_scores)
    best_pairs.push_back({{"hand", score.hand_id}, {"gaze", score.gaze_id}, {"iou", score.iou}});
  const json summary{{"sigmas", sigmas},
                     {"ns", ns},
                     {"cells", cells},
                     {"cluster_counts", counts},
                     {"scenes", inputs.size()},
                     {"best",
                      {{"sigma", sigmas[result.best_sigma_index]},
                       {"n", ns[result.best_n_index]},
                       {"mean_miou", best.miou.mean},
                       {"std_miou", best.miou.std_dev},
                       {"pairs", best_pairs}}}};

  if (!o.out.empty()) {
    require_out_dir(o.out);
    write_text_file(fs::path(o.out) / "sweep.csv", csv.str());
    write_json_file(fs::path(o.out) / "sweep.json", summary);
  }

  if (o.format == "json") {
    std::cout << summary.dump(2) << "\n";
  } else if (o.format == "csv") {
    std::cout << csv.str();
  } else {
    std::cout << "mean mIOU over " << inputs.size() << " scenes\n";
    std::cout << "sigma\\n ";
    for (const double n : ns) std::cout << fmt("%8g", n);
    std::cout << "\n";
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
      std::cout << fmt("%-8g", sigmas[si]);
      for (std::size_t ni = 0; ni < ns.size(); ++ni)
        std::cout << fmt("%8.4f", result.cell(si, ni).miou.mean);
      std::cout << "\n";
    }
    std::cout << "best: sigma " << fmt("%g", sigmas[result.best_sigma_index]) << ", n "
              << fmt("%g", ns[result.best_n_index]) << ", mean mIOU "
              << fmt("%.4f", best.miou.mean) << " (std " << fmt("%.4f", best.miou.std_dev)
              << ")\n";
  }
}

// ---------------------------------------------------------------------------
// timing

struct TimingOpts {
  std::string records;
  std::string out;
  std::string format = "text";
};

void cmd_timing(const TimingOpts& o) {
  if (o.records.empty()) throw ValidationError("--records is required");
  const json j = read_json_file(o.records);
  if (!j.is_array()) throw ValidationError(o.records + ": expected a JSON array of records");
  std::vector<TimingRecord> records;
  for (const auto& r : j) {
    try {
      records.push_back(TimingRecord{r.at("annotator").get<std::string>(),
                                     annotation_method_from_string(r.at("method").get<std::string>()),
                                     r.at("total_seconds").get<double>(),
                                     r.at("label_count").get<std::int64_t>()});
    } catch (const json::exception& e) {
      throw ValidationError(o.records + ": bad record: " + e.what());
    }
  }
  const TimingReport report = timing_report(records);

  json methods = json::object();
  std::ostringstream csv;
  csv << "method,annotator,seconds_per_label\n";
  for (const auto& [method, mt] : report.methods) {
    json per = json::object();
    for (const auto& [annotator, avg] : mt.per_annotator) {
      per[annotator] = avg;
      csv << to_string(method) << "," << annotator << "," << fmt("%.6f", avg) << "\n";
    }
    methods[to_string(method)] = {{"per_annotator", per},
                                  {"average", mt.mean_of_annotator_averages},
                                  {"pooled_average", mt.pooled_average}};
    csv << to_string(method) << ",average," << fmt("%.6f", mt.mean_of_annotator_averages) << "\n";
    csv << to_string(method) << ",pooled," << fmt("%.6f", mt.pooled_average) << "\n";
  }
  json savings = json::object();
  if (const auto s = report.gaze_savings_vs(AnnotationMethod::bbox)) savings["vs_bbox"] = *s;
  if (const auto s = report.gaze_savings_vs(AnnotationMethod::freehand)) savings["vs_freehand"] = *s;
  const json summary{{"methods", methods}, {"savings", savings}};

  if (!o.out.empty()) {
    require_out_dir(o.out);
    write_json_file(fs::path(o.out) / "timing.json", summary);
    write_text_file(fs::path(o.out) / "timing.csv", csv.str());
  }

  if (o.format == "json") {
    std::cout << summary.dump(2) << "\n";
  } else if (o.format == "csv") {
    std::cout << csv.str();
  } else {
    std::cout << "method    avg s/label   pooled s/label\n";
    for (const auto& [method, mt] : report.methods) {
      std::printf("%-9s %11.2f  %14.2f\n", to_string(method).c_str(),
                  mt.mean_of_annotator_averages, mt.pooled_average);
    }
    if (const auto s = report.gaze_savings_vs(AnnotationMethod::bbox))
      std::cout << "gaze saves " << fmt("%.1f", 100.0 * *s) << "% vs bbox\n";
    if (const auto s = report.gaze_savings_vs(AnnotationMethod::freehand))
      std::cout << "gaze saves " << fmt("%.1f", 100.0 * *s) << "% vs freehand\n";
  }
}

// ---------------------------------------------------------------------------
// config plumbing

void cfg_set(const json& cfg, const char* key, double& v) {
  if (cfg.contains(key) && cfg[key].is_number()) v = cfg[key].get<double>();
}
void cfg_set(const json& cfg, const char* key, int& v) {
  if (cfg.contains(key) && cfg[key].is_number()) v = cfg[key].get<int>();
}
void cfg_set(const json& cfg, const char* key, std::int64_t& v) {
  if (cfg.contains(key) && cfg[key].is_number()) v = cfg[key].get<std::int64_t>();
}
void cfg_set(const json& cfg, const char* key, std::uint64_t& v) {
  if (cfg.contains(key) && cfg[key].is_number()) v = cfg[key].get<std::uint64_t>();
}
void cfg_set(const json& cfg, const char* key, bool& v) {
  if (cfg.contains(key) && cfg[key].is_boolean()) v = cfg[key].get<bool>();
}
void cfg_set(const json& cfg, const char* key, std::string& v) {
  if (!cfg.contains(key)) return;
  const auto& j = cfg[key];
  if (j.is_string()) {
    v = j.get<std::string>();
  } else if (j.is_number()) {
    v = fmt("%g", j.get<double>());
  } else if (j.is_array()) {
    std::string joined;
    for (const auto& item : j) {
      if (!joined.empty()) joined += ",";
      joined += item.is_string() ? item.get<std::string>() : fmt("%g", item.get<double>());
    }
    v = joined;
  }
}

json default_config() {
  const SimulateOpts sim;
  const KdeOpts kde;
  const SweepOpts sweep;
  const EvalOpts eval;
  const TileOpts tile;
  return json{
      {"simulate",
       {{"seed", sim.seed},
        {"scenes", sim.scenes},
        {"roi-count", sim.roi_count},
        {"radius-min", sim.radius_min},
        {"radius-max", sim.radius_max},
        {"slide-width", sim.slide_width},
        {"slide-height", sim.slide_height},
        {"mpp", sim.mpp},
        {"screen-width", sim.screen_width},
        {"screen-height", sim.screen_height},
        {"downsample", sim.downsample},
        {"rate", sim.rate},
        {"dwell-min", sim.dwell_min},
        {"dwell-max", sim.dwell_max},
        {"jitter", sim.jitter},
        {"saccade-samples", sim.saccade_samples},
        {"distractors", sim.distractors},
        {"distractor-dwell", sim.distractor_dwell},
        {"pan-zoom", sim.pan_zoom}}},
      {"ingest", {{"format", "text"}}},
      {"kde",
       {{"sigma", kde.sigma}, {"n", kde.n}, {"downsample", kde.downsample}, {"threads", kde.threads}}},
      {"boxes", {{"min-area", -1}, {"confidence", -1.0}}},
      {"tile",
       {{"tile-size", tile.tile_size}, {"overlap", tile.overlap}, {"only-labeled", tile.only_labeled}}},
      {"eval",
       {{"ot", "0.10:0.95:0.05"},
        {"image-width", eval.image_width},
        {"image-height", eval.image_height},
        {"format", eval.format}}},
      {"sweep",
       {{"sigma", sweep.sigma}, {"n", sweep.n}, {"threads", sweep.threads}, {"format", sweep.format}}},
      {"timing", {{"format", "text"}}}};
}

int run_cli_impl(const std::vector<std::string>& args) {
  CLI::App app{"gaze-to-label toolkit: turn recorded gaze sessions into ROI masks and "
               "detection labels, and score them"};
  app.require_subcommand(0, 1);

  bool show_config = false;
  app.add_flag("--show-config", show_config, "print every subcommand's defaults as JSON and exit");
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; keys set flag defaults");

  // Config must be read before options are registered so that its values
  // become the defaults and explicit flags still win.
  json cfg = json::object();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      cfg = read_json_file(args[i + 1]);
    } else if (args[i].rfind("--config=", 0) == 0) {
      cfg = read_json_file(args[i].substr(9));
    }
  }
  if (!cfg.is_object()) throw ValidationError("config file must hold a JSON object");

  SimulateOpts sim;
  cfg_set(cfg, "out", sim.out);
  cfg_set(cfg, "seed", sim.seed);
  cfg_set(cfg, "scenes", sim.scenes);
  cfg_set(cfg, "roi-count", sim.roi_count);
  cfg_set(cfg, "radius-min", sim.radius_min);
  cfg_set(cfg, "radius-max", sim.radius_max);
  cfg_set(cfg, "slide-width", sim.slide_width);
  cfg_set(cfg, "slide-height", sim.slide_height);
  cfg_set(cfg, "mpp", sim.mpp);
  cfg_set(cfg, "screen-width", sim.screen_width);
  cfg_set(cfg, "screen-height", sim.screen_height);
  cfg_set(cfg, "downsample", sim.downsample);
  cfg_set(cfg, "rate", sim.rate);
  cfg_set(cfg, "dwell-min", sim.dwell_min);
  cfg_set(cfg, "dwell-max", sim.dwell_max);
  cfg_set(cfg, "jitter", sim.jitter);
  cfg_set(cfg, "saccade-samples", sim.saccade_samples);
  cfg_set(cfg, "distractors", sim.distractors);
  cfg_set(cfg, "distractor-dwell", sim.distractor_dwell);
  cfg_set(cfg, "pan-zoom", sim.pan_zoom);
  auto* sim_cmd = app.add_subcommand("simulate", "generate synthetic scenes and gaze sessions");
  sim_cmd->add_option("--out", sim.out, "output directory");
  sim_cmd->add_option("--seed", sim.seed, "base seed");
  sim_cmd->add_option("--scenes", sim.scenes, "number of scenes");
  sim_cmd->add_option("--roi-count", sim.roi_count, "ROIs per scene");
  sim_cmd->add_option("--radius-min", sim.radius_min, "smallest ROI semi-axis, slide px");
  sim_cmd->add_option("--radius-max", sim.radius_max, "largest ROI semi-axis, slide px");
  sim_cmd->add_option("--slide-width", sim.slide_width, "slide width, px");
  sim_cmd->add_option("--slide-height", sim.slide_height, "slide height, px");
  sim_cmd->add_option("--mpp", sim.mpp, "microns per pixel");
  sim_cmd->add_option("--screen-width", sim.screen_width, "screen width, px");
  sim_cmd->add_option("--screen-height", sim.screen_height, "screen height, px");
  sim_cmd->add_option("--downsample", sim.downsample, "grid cell size, slide px");
  sim_cmd->add_option("--rate", sim.rate, "sample rate, Hz");
  sim_cmd->add_option("--dwell-min", sim.dwell_min, "shortest ROI dwell, s");
  sim_cmd->add_option("--dwell-max", sim.dwell_max, "longest ROI dwell, s");
  sim_cmd->add_option("--jitter", sim.jitter, "gaze scatter as a fraction of ROI radius");
  sim_cmd->add_option("--saccade-samples", sim.saccade_samples, "samples per transit");
  sim_cmd->add_option("--distractors", sim.distractors, "distractor fixations per session");
  sim_cmd->add_option("--distractor-dwell", sim.distractor_dwell, "distractor dwell, s");
  sim_cmd->add_flag("--pan-zoom", sim.pan_zoom, "emit per-ROI pan/zoom viewport events");
  sim_cmd->callback([&] { cmd_simulate(sim); });

  IngestOpts ingest;
  cfg_set(cfg, "session", ingest.session);
  cfg_set(cfg, "out", ingest.out);
  cfg_set(cfg, "format", ingest.format);
  auto* ingest_cmd = app.add_subcommand("ingest", "parse a session and project gaze to slide space");
  ingest_cmd->add_option("--session", ingest.session, "session JSONL file");
  ingest_cmd->add_option("--out", ingest.out, "output directory (trace.csv, ingest_stats.json)");
  ingest_cmd->add_option("--format", ingest.format, "stdout format: text|json")
      ->check(CLI::IsMember({"text", "json"}));
  ingest_cmd->callback([&] { cmd_ingest(ingest); });

  KdeOpts kde;
  cfg_set(cfg, "session", kde.session);
  cfg_set(cfg, "sigma", kde.sigma);
  cfg_set(cfg, "n", kde.n);
  cfg_set(cfg, "downsample", kde.downsample);
  cfg_set(cfg, "threads", kde.threads);
  cfg_set(cfg, "out", kde.out);
  auto* kde_cmd = app.add_subcommand("kde", "build the ROI mask from a session");
  kde_cmd->add_option("--session", kde.session, "session JSONL file");
  kde_cmd->add_option("--sigma", kde.sigma, "kernel stddev list, slide px (e.g. 200,400)");
  kde_cmd->add_option("--n", kde.n, "threshold scaling factor");
  kde_cmd->add_option("--downsample", kde.downsample, "grid cell size, slide px");
  kde_cmd->add_option("--threads", kde.threads, "worker threads (0 = all cores)");
  kde_cmd->add_option("--out", kde.out, "output directory");
  kde_cmd->callback([&] { cmd_kde(kde); });

  BoxesOpts boxes;
  cfg_set(cfg, "mask", boxes.mask);
  cfg_set(cfg, "min-area", boxes.min_area);
  cfg_set(cfg, "confidence", boxes.confidence);
  cfg_set(cfg, "out", boxes.out);
  auto* boxes_cmd = app.add_subcommand("boxes", "convert a mask into tight bounding-box labels");
  boxes_cmd->add_option("--mask", boxes.mask, "mask PGM (sidecar JSON looked up next to it)");
  boxes_cmd->add_option("--min-area", boxes.min_area,
                        "discard boxes below this slide-px area (-1 = one grid cell)");
  boxes_cmd->add_option("--confidence", boxes.confidence,
                        "attach this confidence to every row (detection-style output)");
  boxes_cmd->add_option("--out", boxes.out, "output label file");
  boxes_cmd->callback([&] { cmd_boxes(boxes); });

  TileOpts tile;
  cfg_set(cfg, "labels", tile.labels);
  cfg_set(cfg, "slide-width", tile.slide_width);
  cfg_set(cfg, "slide-height", tile.slide_height);
  cfg_set(cfg, "tile-size", tile.tile_size);
  cfg_set(cfg, "overlap", tile.overlap);
  cfg_set(cfg, "only-labeled", tile.only_labeled);
  cfg_set(cfg, "out", tile.out);
  auto* tile_cmd = app.add_subcommand("tile", "split slide labels into per-tile label files");
  tile_cmd->add_option("--labels", tile.labels, "slide-space label file");
  tile_cmd->add_option("--slide-width", tile.slide_width, "slide width, px");
  tile_cmd->add_option("--slide-height", tile.slide_height, "slide height, px");
  tile_cmd->add_option("--tile-size", tile.tile_size, "tile edge, px");
  tile_cmd->add_option("--overlap", tile.overlap, "tile overlap, px");
  tile_cmd->add_flag("--only-labeled", tile.only_labeled, "write only tiles holding a label");
  tile_cmd->add_option("--out", tile.out, "output directory");
  tile_cmd->callback([&] { cmd_tile(tile); });

  EvalOpts eval;
  cfg_set(cfg, "det", eval.det);
  cfg_set(cfg, "gt", eval.gt);
  cfg_set(cfg, "ot", eval.ot);
  cfg_set(cfg, "image-width", eval.image_width);
  cfg_set(cfg, "image-height", eval.image_height);
  cfg_set(cfg, "out", eval.out);
  cfg_set(cfg, "format", eval.format);
  auto* eval_cmd = app.add_subcommand("eval", "score detections against ground-truth boxes");
  eval_cmd->add_option("--det", eval.det, "detection label file or directory");
  eval_cmd->add_option("--gt", eval.gt, "ground-truth label file or directory");
  eval_cmd->add_option("--ot", eval.ot, "overlap thresholds (default 0.10:0.95:0.05)");
  eval_cmd->add_option("--image-width", eval.image_width, "label image width, px");
  eval_cmd->add_option("--image-height", eval.image_height, "label image height, px");
  eval_cmd->add_option("--out", eval.out, "output directory");
  eval_cmd->add_option("--format", eval.format, "stdout format: text|json|csv")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  eval_cmd->callback([&] { cmd_eval(eval); });

  SweepOpts sweep;
  cfg_set(cfg, "scenes", sweep.scenes);
  cfg_set(cfg, "sigma", sweep.sigma);
  cfg_set(cfg, "n", sweep.n);
  cfg_set(cfg, "threads", sweep.threads);
  cfg_set(cfg, "out", sweep.out);
  cfg_set(cfg, "format", sweep.format);
  auto* sweep_cmd = app.add_subcommand("sweep", "mIOU grid search over sigma and n");
  sweep_cmd->add_option("--scenes", sweep.scenes, "directory of scene_*/ outputs from simulate");
  sweep_cmd->add_option("--sigma", sweep.sigma, "sigma list");
  sweep_cmd->add_option("--n", sweep.n, "scaling factor list");
  sweep_cmd->add_option("--threads", sweep.threads, "worker threads (0 = all cores)");
  sweep_cmd->add_option("--out", sweep.out, "output directory");
  sweep_cmd->add_option("--format", sweep.format, "stdout format: text|json|csv")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  sweep_cmd->callback([&] { cmd_sweep(sweep); });

  TimingOpts timing;
  cfg_set(cfg, "records", timing.records);
  cfg_set(cfg, "out", timing.out);
  cfg_set(cfg, "format", timing.format);
  auto* timing_cmd = app.add_subcommand("timing", "annotation timing report");
  timing_cmd->add_option("--records", timing.records, "JSON array of timing records");
  timing_cmd->add_option("--out", timing.out, "output directory");
  timing_cmd->add_option("--format", timing.format, "stdout format: text|json|csv")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  timing_cmd->callback([&] { cmd_timing(timing); });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (show_config) {
    std::cout << default_config().dump(2) << "\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return run_cli_impl(args);
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace gazelabel
