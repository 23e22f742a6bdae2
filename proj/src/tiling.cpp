#include "gazelabel/tiling.hpp"

#include <algorithm>

namespace gazelabel {

void TileSpec::validate() const {
  if (tile_size <= 0) throw ValidationError("tile size must be > 0");
  if (overlap < 0 || overlap >= tile_size)
    throw ValidationError("overlap must satisfy 0 <= overlap < tile_size");
  if (slide_width <= 0 || slide_height <= 0)
    throw ValidationError("slide dimensions must be positive");
}

std::string Tile::id() const { return "r" + std::to_string(row) + "_c" + std::to_string(col); }

namespace {

// Tile origins along one axis. The last origin is shifted inward so that the
// final tile keeps the full size while still reaching the slide edge.
std::vector<std::int64_t> axis_origins(std::int64_t extent, std::int64_t tile, std::int64_t stride) {
  std::vector<std::int64_t> origins;
  if (extent <= tile) {
    origins.push_back(0);
    return origins;
  }
  const std::int64_t count = 1 + (extent - tile + stride - 1) / stride;
  for (std::int64_t i = 0; i < count; ++i) origins.push_back(std::min(i * stride, extent - tile));
  return origins;
}

}  // namespace

std::vector<Tile> tile_layout(const TileSpec& spec) {
  spec.validate();
  const std::int64_t stride = spec.tile_size - spec.overlap;
  const auto xs = axis_origins(spec.slide_width, spec.tile_size, stride);
  const auto ys = axis_origins(spec.slide_height, spec.tile_size, stride);
  std::vector<Tile> tiles;
  tiles.reserve(xs.size() * ys.size());
  for (std::size_t r = 0; r < ys.size(); ++r)
    for (std::size_t c = 0; c < xs.size(); ++c)
      tiles.push_back(Tile{static_cast<int>(r), static_cast<int>(c), xs[c], ys[r]});
  return tiles;
}

std::map<std::string, std::vector<TileBox>> tile_labels(std::span<const BBox> boxes,
                                                        const TileSpec& spec) {
  const auto tiles = tile_layout(spec);
  const BBox slide{0, 0, spec.slide_width, spec.slide_height};
  for (const auto& box : boxes) {
    if (!box.valid()) throw ValidationError("invalid label box");
    if (clip_box(box, slide) != box) throw ValidationError("label box outside slide bounds");
  }

  std::map<std::string, std::vector<TileBox>> out;
  for (const auto& tile : tiles) {
    const BBox bounds = tile.bounds(spec);
    std::vector<TileBox> kept;
    for (const auto& box : boxes) {
      const BBox clipped = clip_box(box, bounds);
      if (!clipped.valid()) continue;
      const bool whole = clipped == box;
      // A partial instance must retain at least a quarter of its area.
      if (!whole && 4 * clipped.area() < box.area()) continue;
      kept.push_back(TileBox{BBox{clipped.x_min - tile.x0, clipped.y_min - tile.y0,
                                  clipped.x_max - tile.x0, clipped.y_max - tile.y0},
                             !whole});
    }
    if (!kept.empty()) out.emplace(tile.id(), std::move(kept));
  }
  return out;
}

std::vector<Detection> merge_tile_detections(
    const std::map<std::string, std::vector<Detection>>& per_tile, const TileSpec& spec,
    double suppress_iou) {
  const auto tiles = tile_layout(spec);
  std::map<std::string, const Tile*> by_id;
  for (const auto& tile : tiles) by_id.emplace(tile.id(), &tile);

  std::vector<Detection> all;
  for (const auto& [id, dets] : per_tile) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("unknown tile id: " + id);
    const Tile& tile = *it->second;
    for (const auto& det : dets) {
      Detection shifted = det;
      shifted.bbox = BBox{det.bbox.x_min + tile.x0, det.bbox.y_min + tile.y0,
                          det.bbox.x_max + tile.x0, det.bbox.y_max + tile.y0};
      all.push_back(shifted);
    }
  }

  // Canonical order makes suppression independent of tile iteration order.
  std::sort(all.begin(), all.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.bbox != b.bbox) return a.bbox < b.bbox;
    return a.image_id < b.image_id;
  });

  std::vector<Detection> kept;
  for (const auto& det : all) {
    bool duplicate = false;
    for (const auto& k : kept) {
      if (box_iou(det.bbox, k.bbox) >= suppress_iou) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(det);
  }
  return kept;
}

}  // namespace gazelabel
