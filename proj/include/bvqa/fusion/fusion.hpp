#pragma once

#include <cstdint>

#include "bvqa/tensorkit/tensor.hpp"

namespace bvqa::fusion {

/// Keeps sharpness rows 0, 2, 4, ... and appends the motion row of the same
/// temporal index: [T, Ds] + [T/2, Dm] -> [T/2, Ds + Dm]. A leading batch
/// axis is also accepted: [B, T, Ds] + [B, T/2, Dm] -> [B, T/2, Ds + Dm].
Tensor fuse(const Tensor& sharp, const Tensor& motion);

/// Single-output fully connected layer.
struct QualityHead {
  Tensor weight;  // [D, 1]
  Tensor bias;    // [1]

  std::size_t width() const { return weight.dim(0); }
  /// Uniform(-1/sqrt(D), 1/sqrt(D)) weights, zero bias.
  static QualityHead init(std::size_t width, std::uint64_t seed);
};

/// Temporal mean of per-row scores row.W + b. [T, D] gives a scalar;
/// [B, T, D] gives [B].
Tensor predict_quality(const Tensor& fused, const QualityHead& head);

}  // namespace bvqa::fusion
