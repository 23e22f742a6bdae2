#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gazelabel/detection.hpp"
#include "gazelabel/geometry.hpp"

namespace gazelabel {

struct TileSpec {
  std::int64_t tile_size = 4000;
  std::int64_t overlap = 0;
  std::int64_t slide_width = 0;
  std::int64_t slide_height = 0;

  void validate() const;
};

struct Tile {
  int row = 0;
  int col = 0;
  std::int64_t x0 = 0;  // slide px origin
  std::int64_t y0 = 0;

  std::string id() const;  // "r{row}_c{col}"
  BBox bounds(const TileSpec& spec) const {
    return BBox{x0, y0, x0 + spec.tile_size, y0 + spec.tile_size};
  }
};

// Uniform tile grid with stride tile_size - overlap. Tiles at the right and
// bottom edges are shifted inward so that every tile keeps the full size and
// every slide pixel is covered.
std::vector<Tile> tile_layout(const TileSpec& spec);

struct TileBox {
  BBox box;  // tile-local coordinates
  bool clipped = false;
};

// Assigns each box to every tile it intersects, clipped to the tile and
// shifted to tile-local coordinates. A clipped instance is kept only when it
// retains at least 25% of the original area. Only tiles that received at
// least one box appear in the result.
std::map<std::string, std::vector<TileBox>> tile_labels(std::span<const BBox> boxes,
                                                        const TileSpec& spec);

// Shifts tile-local detections back to slide coordinates and suppresses
// duplicates: among detections with pairwise IOU >= suppress_iou, only the
// highest-confidence one survives. Output is canonically sorted, so the
// result does not depend on tile processing order.
std::vector<Detection> merge_tile_detections(
    const std::map<std::string, std::vector<Detection>>& per_tile, const TileSpec& spec,
    double suppress_iou = 0.5);

}  // namespace gazelabel
