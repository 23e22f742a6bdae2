#include "gazelabel/grid.hpp"

#include <algorithm>
#include <limits>

namespace gazelabel {

GridSpec GridSpec::for_slide(std::int64_t slide_width, std::int64_t slide_height, int downsample) {
  if (slide_width <= 0 || slide_height <= 0)
    throw ValidationError("slide dimensions must be positive");
  if (downsample < 1) throw ValidationError("downsample must be >= 1");
  const std::int64_t w = (slide_width + downsample - 1) / downsample;
  const std::int64_t h = (slide_height + downsample - 1) / downsample;
  if (w > std::numeric_limits<int>::max() || h > std::numeric_limits<int>::max())
    throw ValidationError("grid too large for the given downsample");
  GridSpec spec;
  spec.downsample = downsample;
  spec.slide_width = slide_width;
  spec.slide_height = slide_height;
  spec.width_cells = static_cast<int>(w);
  spec.height_cells = static_cast<int>(h);
  return spec;
}

std::size_t BinaryMask::set_count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

}  // namespace gazelabel
