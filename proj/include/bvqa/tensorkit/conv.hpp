#pragma once

#include <array>
#include <cstddef>

#include "bvqa/tensorkit/tensor.hpp"

namespace bvqa {

/// Convolution geometry, ordered (T, H, W). 2D convolutions use kT = 1.
struct ConvSpec {
  std::array<std::size_t, 3> kernel{1, 1, 1};
  std::array<std::size_t, 3> stride{1, 1, 1};
  std::array<std::size_t, 3> padding{0, 0, 0};
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;

  static ConvSpec conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
                         std::size_t padding);
  static ConvSpec conv3d(std::size_t in, std::size_t out, std::array<std::size_t, 3> kernel,
                         std::array<std::size_t, 3> stride, std::array<std::size_t, 3> padding);

  /// floor((in + 2 pad - kernel) / stride) + 1; throws when the kernel does
  /// not fit inside the padded input.
  std::size_t output_extent(std::size_t axis, std::size_t in) const;
  /// [out, in, kT, kH, kW]
  Shape weight_shape() const;
  std::size_t fan_in() const { return in_channels * kernel[0] * kernel[1] * kernel[2]; }
  void validate() const;
};

/// Cross-correlation (no kernel flip). x is [N, C, H, W] or [N, C, T, H, W];
/// weight is [O, C, kT, kH, kW] (or [O, C, kH, kW] for 2D). bias [O] may be
/// undefined.
Tensor conv(const Tensor& x, const ConvSpec& spec, const Tensor& weight, const Tensor& bias);

struct PoolSpec {
  std::array<std::size_t, 3> kernel{1, 1, 1};
  std::array<std::size_t, 3> stride{1, 1, 1};
  std::array<std::size_t, 3> padding{0, 0, 0};

  std::size_t output_extent(std::size_t axis, std::size_t in) const;
};

/// Max pooling over (T,)H,W; padded cells never win. Ties go to the first
/// maximum in scan order.
Tensor max_pool(const Tensor& x, const PoolSpec& spec);

}  // namespace bvqa
