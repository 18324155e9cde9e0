#include "bvqa/fusion/fusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bvqa/dataset/rng.hpp"
#include "bvqa/tensorkit/ops.hpp"

namespace bvqa::fusion {

Tensor fuse(const Tensor& sharp, const Tensor& motion) {
  if (sharp.rank() != motion.rank() || (sharp.rank() != 2 && sharp.rank() != 3)) {
    throw ShapeError("fuse: expected [T, D] or [B, T, D] features, got " +
                     shape_str(sharp.shape()) + " and " + shape_str(motion.shape()));
  }
  const std::size_t axis = sharp.rank() - 2;
  if (axis == 1 && sharp.dim(0) != motion.dim(0)) {
    throw ShapeError("fuse: batch sizes differ (" + std::to_string(sharp.dim(0)) + " vs " +
                     std::to_string(motion.dim(0)) + ")");
  }
  const std::size_t ts = sharp.dim(axis), tm = motion.dim(axis);
  if (ts != 2 * tm) {
    throw ShapeError("fuse: sharpness length " + std::to_string(ts) +
                     " must be twice the motion length " + std::to_string(tm));
  }
  return concat({temporal_subsample(sharp, 2, axis), motion}, axis + 1);
}

QualityHead QualityHead::init(std::size_t width, std::uint64_t seed) {
  if (width == 0) throw std::invalid_argument("QualityHead: zero width");
  data::Rng rng(data::derive_seed(seed, "head"));
  const double bound = 1.0 / std::sqrt(double(width));
  std::vector<double> w(width);
  for (double& v : w) v = rng.uniform(-bound, bound);
  return {Tensor(Shape{width, 1}, std::move(w), true), Tensor::zeros({1}, true)};
}

Tensor predict_quality(const Tensor& fused, const QualityHead& head) {
  if (fused.rank() != 2 && fused.rank() != 3) {
    throw ShapeError("predict_quality: expected [T, D] or [B, T, D], got " +
                     shape_str(fused.shape()));
  }
  const std::size_t d = fused.dim(fused.rank() - 1);
  if (d != head.width()) {
    throw ShapeError("predict_quality: feature width " + std::to_string(d) +
                     " does not match head width " + std::to_string(head.width()));
  }
  const bool batched = fused.rank() == 3;
  const std::size_t b = batched ? fused.dim(0) : 1;
  const std::size_t t = fused.dim(fused.rank() - 2);
  const Tensor rows = reshape(linear(fused, head.weight, head.bias), {b, t});
  const Tensor average = Tensor::full({t, 1}, 1.0 / double(t));
  const Tensor scores = linear(rows, average, Tensor());
  return batched ? reshape(scores, {b}) : reshape(scores, {});
}

}  // namespace bvqa::fusion
