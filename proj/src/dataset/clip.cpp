#include "bvqa/dataset/clip.hpp"

#include <stdexcept>

namespace bvqa {

void VideoClip::validate() const {
  if (!frames.defined() || frames.rank() != 4 || frames.dim(1) != 3) {
    throw std::invalid_argument("clip '" + id + "': frames must be [T, 3, H, W]");
  }
  const std::size_t t = frames.dim(0);
  if (t < 2 || t % 2 != 0) {
    throw std::invalid_argument("clip '" + id + "': frame count " + std::to_string(t) +
                                " must be even and at least 2");
  }
  if (mos && !(*mos >= 1.0 && *mos <= 5.0)) {
    throw std::invalid_argument("clip '" + id + "': MOS outside [1, 5]");
  }
}

}  // namespace bvqa
