#pragma once

#include <span>

#include "bvqa/tensorkit/tensor.hpp"

namespace bvqa::quality {

inline constexpr double kDefaultTau = 0.1;
inline constexpr double kDefaultAlpha = 0.5;

/// Differentiable descending ranks:
///   r_i = 1 + sum_{j != i} sigmoid((s_j - s_i) / tau)
/// so the largest score gets the rank closest to 1. Ranks sum to n(n+1)/2.
Tensor soft_rank(const Tensor& scores, double tau);

/// Differentiable Pearson correlation of two equal-length vectors.
Tensor pearson(const Tensor& x, const Tensor& y);

/// (1 - pearson(pred, mos)) / 2.
Tensor plcc_loss(const Tensor& pred, std::span<const double> mos);

/// (1 - pearson(soft_rank(z, tau), rank(mos))) / 2 where z is pred scaled to
/// unit standard deviation and both rankings are descending.
Tensor srcc_loss(const Tensor& pred, std::span<const double> mos, double tau = kDefaultTau);

/// alpha * plcc_loss + (1 - alpha) * srcc_loss.
Tensor total_loss(const Tensor& pred, std::span<const double> mos, double alpha = kDefaultAlpha,
                  double tau = kDefaultTau);

}  // namespace bvqa::quality
