#pragma once

#include <cstddef>
#include <vector>

#include "bvqa/tensorkit/tensor.hpp"

namespace bvqa {

// Elementwise binary ops. Operands must have equal shapes, or one of them
// must hold a single value, which is broadcast.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor sqrt(const Tensor& x);

/// Sum of all elements, shape [].
Tensor sum(const Tensor& x);
/// Mean of all elements, shape [].
Tensor mean(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
/// Output axis i is input axis axes[i].
Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes);
Tensor concat(const std::vector<Tensor>& xs, std::size_t axis);
/// Keeps indices 0, stride, 2*stride, ... along `axis`.
Tensor temporal_subsample(const Tensor& x, std::size_t stride, std::size_t axis);

/// y = x W + b for x [..., Din], W [Din, Dout], b [Dout] (b may be undefined).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Global average + standard deviation pooling of x [C, ...] into [2C]:
/// per-channel means followed by per-channel sqrt(var + eps) with the
/// population variance.
Tensor gap_gsp(const Tensor& x);
/// Row-batched form: x [N, C, ...] -> [N, 2C].
Tensor gap_gsp_rows(const Tensor& x);

inline constexpr double kGspEpsilon = 1e-8;

}  // namespace bvqa
