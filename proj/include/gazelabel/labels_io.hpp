#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazelabel/geometry.hpp"
#include "gazelabel/grid.hpp"

#include "json.hpp"

namespace gazelabel {

// One line of the plain-text label format: `class_id cx cy w h [confidence]`
// with center/size normalized to the image dimensions, six decimals.
struct LabelRow {
  int class_id = 0;
  BBox box;  // pixel coordinates
  std::optional<double> confidence;
};

void write_label_rows(std::ostream& out, std::span<const LabelRow> rows, std::int64_t image_width,
                      std::int64_t image_height);
std::vector<LabelRow> read_label_rows(std::istream& in, std::int64_t image_width,
                                      std::int64_t image_height);

void write_label_file(const std::filesystem::path& path, std::span<const LabelRow> rows,
                      std::int64_t image_width, std::int64_t image_height);
std::vector<LabelRow> read_label_file(const std::filesystem::path& path,
                                      std::int64_t image_width, std::int64_t image_height);

// Binary PGM (P5, maxval 255) with set cells written as 255. The sidecar
// JSON records the GridSpec so the mask can be mapped back to slide px.
void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& pgm_path,
                    const std::filesystem::path& sidecar_path);
BinaryMask read_mask_pgm(const std::filesystem::path& pgm_path,
                         const std::filesystem::path& sidecar_path);

// {"dims":[W,H],"runs":[[start,len],...]} over row-major cell order.
nlohmann::json mask_to_rle_json(const BinaryMask& mask);
BinaryMask mask_from_rle_json(const nlohmann::json& j, const GridSpec& spec);

nlohmann::json grid_spec_to_json(const GridSpec& spec);
GridSpec grid_spec_from_json(const nlohmann::json& j);

// Small helpers shared by the CLI; they throw IoError with path context.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace gazelabel
