#pragma once

#include <span>

#include "bvqa/tensorkit/tensor.hpp"

namespace bvqa {

/// p <- p - lr * g for every parameter whose freeze flag is false. `frozen`
/// may be empty (nothing frozen); otherwise it must match params in length.
/// Frozen parameters are left untouched.
void sgd_step(std::span<const Tensor> params, std::span<const Tensor> grads, double lr,
              std::span<const bool> frozen = {});

/// Same update using each parameter's accumulated gradient. Parameters
/// without an accumulated gradient are skipped.
void sgd_step(std::span<const Tensor> params, double lr, std::span<const bool> frozen = {});

/// Rescales accumulated gradients so their joint L2 norm is at most
/// max_norm. Returns the norm before clipping.
double clip_grad_norm(std::span<const Tensor> params, double max_norm);

void zero_grads(std::span<const Tensor> params);

}  // namespace bvqa
