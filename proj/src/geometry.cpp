#include "gazelabel/geometry.hpp"

namespace gazelabel {

void SlideGeometry::validate() const {
  if (slide_width <= 0 || slide_height <= 0)
    throw ValidationError("slide dimensions must be positive");
  if (mpp <= 0.0) throw ValidationError("mpp must be positive");
  if (screen_width <= 0 || screen_height <= 0)
    throw ValidationError("screen dimensions must be positive");
}

}  // namespace gazelabel
