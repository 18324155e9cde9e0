#pragma once

// Central finite-difference gradient oracle, test-only.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "bvqa/tensorkit/tensor.hpp"

namespace bvqa::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

/// Compares backward() of loss_fn against central differences for every
/// element of every input. Relative error is |a - n| / max(|a|, |n|, floor).
inline GradCheck gradcheck(const std::function<Tensor()>& loss_fn, const std::vector<Tensor>& inputs,
                           double step = 1e-5, double floor = 1e-7) {
  for (const Tensor& t : inputs) t.zero_grad();
  loss_fn().backward();
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : inputs) {
    auto g = t.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(t.numel(), 0.0);
  }

  GradCheck out;
  NoGradGuard no_grad;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double keep = values[i];
      values[i] = keep + step;
      const double up = loss_fn().item();
      values[i] = keep - step;
      const double down = loss_fn().item();
      values[i] = keep;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      out.max_rel_error = std::max(out.max_rel_error, std::abs(a - numeric) / denom);
      ++out.checked;
    }
  }
  return out;
}

inline Tensor random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = true) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = u(rng);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

}  // namespace bvqa::testing
