#include "bvqa/dataset/distort.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "bvqa/dataset/rng.hpp"

namespace bvqa::data {

namespace {

void check_image(const Tensor& image, const char* who) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ShapeError(std::string(who) + ": expected [3, H, W], got " + shape_str(image.shape()));
  }
}

}  // namespace

const char* kind_name(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::GaussianBlur: return "gaussian_blur";
    case DistortionKind::GaussianNoise: return "gaussian_noise";
    case DistortionKind::ContrastReduction: return "contrast_reduction";
  }
  return "?";
}

DistortionKind parse_kind(const std::string& name) {
  if (name == "gaussian_blur") return DistortionKind::GaussianBlur;
  if (name == "gaussian_noise") return DistortionKind::GaussianNoise;
  if (name == "contrast_reduction") return DistortionKind::ContrastReduction;
  throw std::invalid_argument("unknown distortion kind '" + name + "'");
}

Tensor gaussian_blur(const Tensor& image, double sigma) {
  check_image(image, "gaussian_blur");
  if (sigma <= 0.0) return Tensor(image.shape(), {image.data().begin(), image.data().end()});
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> w(2 * radius + 1);
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    w[i + radius] = std::exp(-double(i * i) / (2.0 * sigma * sigma));
    total += w[i + radius];
  }
  for (double& v : w) v /= total;

  const auto h = static_cast<std::ptrdiff_t>(image.dim(1));
  const auto wd = static_cast<std::ptrdiff_t>(image.dim(2));
  std::vector<double> src(image.data().begin(), image.data().end());
  std::vector<double> tmp(src.size());
  // Weighted sum of differences from the centre keeps constants exact.
  auto pass = [&](const std::vector<double>& in, std::vector<double>& out, bool horizontal) {
    for (std::ptrdiff_t c = 0; c < 3; ++c) {
      const double* p = in.data() + c * h * wd;
      double* q = out.data() + c * h * wd;
      for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < wd; ++x) {
          const double centre = p[y * wd + x];
          double acc = 0.0;
          for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
            const std::ptrdiff_t yy = horizontal ? y : std::clamp<std::ptrdiff_t>(y + i, 0, h - 1);
            const std::ptrdiff_t xx = horizontal ? std::clamp<std::ptrdiff_t>(x + i, 0, wd - 1) : x;
            acc += w[i + radius] * (p[yy * wd + xx] - centre);
          }
          q[y * wd + x] = centre + acc;
        }
      }
    }
  };
  pass(src, tmp, true);
  pass(tmp, src, false);
  for (double& v : src) v = std::clamp(v, 0.0, 1.0);
  return Tensor(image.shape(), std::move(src));
}

Tensor distort_image(const Tensor& image, const DistortionSpec& spec) {
  check_image(image, "distort_image");
  if (!(spec.level >= 0.0 && spec.level <= 1.0)) {
    throw std::invalid_argument("distort_image: level " + std::to_string(spec.level) +
                                " outside [0, 1]");
  }
  std::vector<double> out(image.data().begin(), image.data().end());
  if (spec.level == 0.0) return Tensor(image.shape(), std::move(out));
  switch (spec.kind) {
    case DistortionKind::GaussianBlur:
      return gaussian_blur(image, kMaxBlurSigma * spec.level);
    case DistortionKind::GaussianNoise: {
      Rng rng(spec.seed);
      const double sd = kMaxNoiseSigma * spec.level;
      for (double& v : out) v = std::clamp(v + sd * rng.normal(), 0.0, 1.0);
      break;
    }
    case DistortionKind::ContrastReduction:
      for (double& v : out) v = 0.5 + (1.0 - spec.level) * (v - 0.5);
      break;
  }
  return Tensor(image.shape(), std::move(out));
}

double mean_abs_laplacian(const Tensor& image) {
  check_image(image, "mean_abs_laplacian");
  const std::size_t h = image.dim(1), w = image.dim(2);
  if (h < 3 || w < 3) return 0.0;
  auto p = image.data();
  double acc = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double* q = p.data() + c * h * w;
    for (std::size_t y = 1; y + 1 < h; ++y) {
      for (std::size_t x = 1; x + 1 < w; ++x) {
        const double lap = q[(y - 1) * w + x] + q[(y + 1) * w + x] + q[y * w + x - 1] +
                           q[y * w + x + 1] - 4.0 * q[y * w + x];
        acc += std::abs(lap);
      }
    }
  }
  return acc / double(3 * (h - 2) * (w - 2));
}

}  // namespace bvqa::data
