#pragma once

#include <cstdint>
#include <string>

#include "bvqa/tensorkit/tensor.hpp"

namespace bvqa::data {

enum class DistortionKind { GaussianBlur, GaussianNoise, ContrastReduction };

const char* kind_name(DistortionKind kind);
DistortionKind parse_kind(const std::string& name);

struct DistortionSpec {
  DistortionKind kind = DistortionKind::GaussianBlur;
  double level = 0.0;  // in [0, 1]
  std::uint64_t seed = 0;
};

/// Blur sigma at level 1.
inline constexpr double kMaxBlurSigma = 3.0;
/// Noise standard deviation at level 1.
inline constexpr double kMaxNoiseSigma = 0.2;

/// Applies one distortion to a [3, H, W] image in [0, 1]. Level 0 returns an
/// exact copy for every kind.
Tensor distort_image(const Tensor& image, const DistortionSpec& spec);

/// Separable Gaussian blur with edge-replicate padding, radius ceil(3 sigma).
Tensor gaussian_blur(const Tensor& image, double sigma);

/// Mean absolute 4-neighbour Laplacian over interior pixels of all channels.
double mean_abs_laplacian(const Tensor& image);

}  // namespace bvqa::data
