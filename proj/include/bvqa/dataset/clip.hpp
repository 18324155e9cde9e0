#pragma once

#include <optional>
#include <string>

#include "bvqa/tensorkit/tensor.hpp"

namespace bvqa {

/// A video clip: frames [T, 3, H, W] with values in [0, 1] and an optional
/// mean opinion score in [1, 5].
struct VideoClip {
  std::string id;
  Tensor frames;
  std::optional<double> mos;

  std::size_t frame_count() const { return frames.dim(0); }
  std::size_t height() const { return frames.dim(2); }
  std::size_t width() const { return frames.dim(3); }

  /// Throws std::invalid_argument unless T >= 2, T is even and the frame
  /// layout is [T, 3, H, W].
  void validate() const;
};

}  // namespace bvqa
