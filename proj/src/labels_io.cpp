#include "gazelabel/labels_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gazelabel {

using nlohmann::json;

void write_label_rows(std::ostream& out, std::span<const LabelRow> rows, std::int64_t image_width,
                      std::int64_t image_height) {
  if (image_width <= 0 || image_height <= 0)
    throw ValidationError("image dimensions must be positive");
  char buf[160];
  for (const auto& row : rows) {
    if (!row.box.valid()) throw ValidationError("invalid label box");
    const double w = static_cast<double>(image_width);
    const double h = static_cast<double>(image_height);
    const double cx = 0.5 * static_cast<double>(row.box.x_min + row.box.x_max) / w;
    const double cy = 0.5 * static_cast<double>(row.box.y_min + row.box.y_max) / h;
    const double bw = static_cast<double>(row.box.width()) / w;
    const double bh = static_cast<double>(row.box.height()) / h;
    int len = std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f", row.class_id, cx, cy, bw, bh);
    if (row.confidence) {
      len += std::snprintf(buf + len, sizeof buf - len, " %.6f", *row.confidence);
    }
    out.write(buf, len);
    out.put('\n');
  }
}

std::vector<LabelRow> read_label_rows(std::istream& in, std::int64_t image_width,
                                      std::int64_t image_height) {
  if (image_width <= 0 || image_height <= 0)
    throw ValidationError("image dimensions must be positive");
  std::vector<LabelRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    LabelRow row;
    double cx, cy, bw, bh;
    if (!(ss >> row.class_id >> cx >> cy >> bw >> bh))
      throw ValidationError("label line " + std::to_string(line_no) + ": expected 'class cx cy w h'");
    double conf;
    if (ss >> conf) {
      if (conf < 0.0 || conf > 1.0)
        throw ValidationError("label line " + std::to_string(line_no) + ": confidence out of [0, 1]");
      row.confidence = conf;
    }
    std::string extra;
    if (ss >> extra)
      throw ValidationError("label line " + std::to_string(line_no) + ": trailing tokens");
    if (row.class_id < 0)
      throw ValidationError("label line " + std::to_string(line_no) + ": negative class id");
    const double w = static_cast<double>(image_width);
    const double h = static_cast<double>(image_height);
    row.box.x_min = std::llround(cx * w - 0.5 * bw * w);
    row.box.x_max = std::llround(cx * w + 0.5 * bw * w);
    row.box.y_min = std::llround(cy * h - 0.5 * bh * h);
    row.box.y_max = std::llround(cy * h + 0.5 * bh * h);
    if (!row.box.valid())
      throw ValidationError("label line " + std::to_string(line_no) + ": degenerate box");
    rows.push_back(row);
  }
  return rows;
}

void write_label_file(const std::filesystem::path& path, std::span<const LabelRow> rows,
                      std::int64_t image_width, std::int64_t image_height) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write label file: " + path.string());
  write_label_rows(out, rows, image_width, image_height);
  if (!out) throw IoError("failed while writing label file: " + path.string());
}

std::vector<LabelRow> read_label_file(const std::filesystem::path& path, std::int64_t image_width,
                                      std::int64_t image_height) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file: " + path.string());
  try {
    return read_label_rows(in, image_width, image_height);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

json grid_spec_to_json(const GridSpec& spec) {
  return json{{"downsample", spec.downsample},
              {"grid_width", spec.width_cells},
              {"grid_height", spec.height_cells},
              {"slide_width", spec.slide_width},
              {"slide_height", spec.slide_height}};
}

GridSpec grid_spec_from_json(const json& j) {
  GridSpec spec;
  try {
    spec.downsample = j.at("downsample").get<int>();
    spec.width_cells = j.at("grid_width").get<int>();
    spec.height_cells = j.at("grid_height").get<int>();
    spec.slide_width = j.at("slide_width").get<std::int64_t>();
    spec.slide_height = j.at("slide_height").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad grid spec JSON: ") + e.what());
  }
  const GridSpec derived = GridSpec::for_slide(spec.slide_width, spec.slide_height, spec.downsample);
  if (!(derived == spec)) throw ValidationError("grid spec JSON is inconsistent");
  return spec;
}

void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& pgm_path,
                    const std::filesystem::path& sidecar_path) {
  std::ofstream out(pgm_path, std::ios::binary);
  if (!out) throw IoError("cannot write mask: " + pgm_path.string());
  out << "P5\n" << mask.spec.width_cells << " " << mask.spec.height_cells << "\n255\n";
  std::vector<char> bytes(mask.bits.size());
  for (std::size_t i = 0; i < mask.bits.size(); ++i)
    bytes[i] = mask.bits[i] ? static_cast<char>(0xFF) : 0;
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed while writing mask: " + pgm_path.string());
  write_json_file(sidecar_path, grid_spec_to_json(mask.spec));
}

BinaryMask read_mask_pgm(const std::filesystem::path& pgm_path,
                         const std::filesystem::path& sidecar_path) {
  const GridSpec spec = grid_spec_from_json(read_json_file(sidecar_path));
  std::ifstream in(pgm_path, std::ios::binary);
  if (!in) throw IoError("cannot open mask: " + pgm_path.string());
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (magic != "P5" || maxval != 255)
    throw ValidationError("unsupported PGM header in " + pgm_path.string());
  if (width != spec.width_cells || height != spec.height_cells)
    throw ValidationError("mask dimensions disagree with sidecar: " + pgm_path.string());
  in.get();  // single whitespace after maxval
  BinaryMask mask(spec);
  std::vector<char> bytes(mask.bits.size());
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw ValidationError("truncated PGM payload: " + pgm_path.string());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const auto v = static_cast<unsigned char>(bytes[i]);
    if (v != 0 && v != 255) throw ValidationError("non-binary PGM payload: " + pgm_path.string());
    mask.bits[i] = v == 255 ? 1 : 0;
  }
  return mask;
}

json mask_to_rle_json(const BinaryMask& mask) {
  json runs = json::array();
  const auto& bits = mask.bits;
  std::size_t i = 0;
  while (i < bits.size()) {
    if (!bits[i]) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < bits.size() && bits[i]) ++i;
    runs.push_back(json::array({start, i - start}));
  }
  return json{{"dims", {mask.spec.width_cells, mask.spec.height_cells}}, {"runs", runs}};
}

BinaryMask mask_from_rle_json(const json& j, const GridSpec& spec) {
  try {
    const auto dims = j.at("dims");
    if (dims.at(0).get<int>() != spec.width_cells || dims.at(1).get<int>() != spec.height_cells)
      throw ValidationError("RLE dims disagree with grid spec");
    BinaryMask mask(spec);
    for (const auto& run : j.at("runs")) {
      const auto start = run.at(0).get<std::size_t>();
      const auto len = run.at(1).get<std::size_t>();
      if (start + len > mask.bits.size()) throw ValidationError("RLE run out of range");
      std::fill(mask.bits.begin() + start, mask.bits.begin() + start + len, std::uint8_t{1});
    }
    return mask;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad RLE JSON: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << content;
  if (!out) throw IoError("failed while writing file: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace gazelabel
