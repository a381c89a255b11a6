#include "seagrass/data/raster.hpp"

namespace seagrass {

LabelMap binarize_gray(const GrayMap& gray) {
  LabelMap out(gray.height, gray.width);
  for (std::size_t i = 0; i < gray.values.size(); ++i) out.classes[i] = gray.values[i] > 0.5f ? 1 : 0;
  return out;
}

}  // namespace seagrass
