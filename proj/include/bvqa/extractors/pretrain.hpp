#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bvqa/dataset/synth.hpp"
#include "bvqa/extractors/network.hpp"

namespace bvqa::extract {

struct PretrainResult {
  NetworkParams params;
  /// Full-set MSE before each epoch, then once more after the last one
  /// (epochs + 1 entries).
  std::vector<double> loss_trace;
  /// The fitted regressor in raw feature units: label ~ features.W + b.
  Tensor head_weight;  // [D, 1]
  double head_bias = 0.0;
};

/// Regresses pseudo-MOS from pooled 2D features through a temporary linear
/// head, minimizing the mean squared error with seeded minibatch SGD. The
/// head input is standardized with the initial feature statistics. Only
/// unfrozen parameters move; the input params are not modified.
PretrainResult pretrain_sharpness(const NetworkSpec& spec, const NetworkParams& params,
                                  std::span<const data::LabeledImage> images, std::size_t epochs,
                                  double lr, std::uint64_t seed, std::size_t batch_size = 8);

}  // namespace bvqa::extract
