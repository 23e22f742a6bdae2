#pragma once

#include <cstdint>
#include <vector>

#include "gazelabel/errors.hpp"

namespace gazelabel {

// Downsampled raster over the slide. Cell (cx, cy) covers slide pixels
// [cx*downsample, (cx+1)*downsample) in x (same in y); its center sits at
// ((cx+0.5)*downsample, (cy+0.5)*downsample) in slide coordinates. The last
// row/column may extend past the slide edge when the dimensions do not
// divide evenly.
struct GridSpec {
  int downsample = 16;  // slide px per cell
  std::int64_t slide_width = 0;
  std::int64_t slide_height = 0;
  int width_cells = 0;
  int height_cells = 0;

  static GridSpec for_slide(std::int64_t slide_width, std::int64_t slide_height,
                            int downsample = 16);

  std::size_t cell_count() const {
    return static_cast<std::size_t>(width_cells) * static_cast<std::size_t>(height_cells);
  }
  std::size_t index(int cx, int cy) const {
    return static_cast<std::size_t>(cy) * static_cast<std::size_t>(width_cells) + cx;
  }
  double center_x(int cx) const { return (cx + 0.5) * downsample; }
  double center_y(int cy) const { return (cy + 0.5) * downsample; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Accumulated fixation intensity per cell.
struct DensityGrid {
  GridSpec spec;
  double sigma = 0.0;  // kernel stddev in slide px
  std::vector<double> values;

  DensityGrid() = default;
  explicit DensityGrid(const GridSpec& s, double sig = 0.0)
      : spec(s), sigma(sig), values(s.cell_count(), 0.0) {}

  double at(int cx, int cy) const { return values[spec.index(cx, cy)]; }
  double& at(int cx, int cy) { return values[spec.index(cx, cy)]; }
};

struct BinaryMask {
  GridSpec spec;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  explicit BinaryMask(const GridSpec& s) : spec(s), bits(s.cell_count(), 0) {}

  bool test(int cx, int cy) const { return bits[spec.index(cx, cy)] != 0; }
  void set(int cx, int cy, bool on = true) { bits[spec.index(cx, cy)] = on ? 1 : 0; }
  std::size_t set_count() const;
  bool empty() const { return set_count() == 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

}  // namespace gazelabel
