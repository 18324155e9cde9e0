#include "bvqa/tensorkit/optim.hpp"

#include <cmath>
#include <string>

namespace bvqa {

namespace {

void check_common(std::size_t n_params, double lr, std::span<const bool> frozen) {
  if (!(lr >= 0.0)) throw std::invalid_argument("sgd_step: learning rate must be >= 0");
  if (!frozen.empty() && frozen.size() != n_params) {
    throw std::invalid_argument("sgd_step: freeze mask has " + std::to_string(frozen.size()) +
                                " entries for " + std::to_string(n_params) + " parameters");
  }
}

void apply(const Tensor& p, std::span<const double> g, double lr) {
  auto v = p.mutable_data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
}

}  // namespace

void sgd_step(std::span<const Tensor> params, std::span<const Tensor> grads, double lr,
              std::span<const bool> frozen) {
  check_common(params.size(), lr, frozen);
  if (grads.size() != params.size()) {
    throw std::invalid_argument("sgd_step: parameter and gradient counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape()) {
      throw ShapeError("sgd_step: parameter " + std::to_string(i) + " has shape " +
                       shape_str(params[i].shape()) + " but gradient " +
                       shape_str(grads[i].shape()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!frozen.empty() && frozen[i]) continue;
    apply(params[i], grads[i].data(), lr);
  }
}

void sgd_step(std::span<const Tensor> params, double lr, std::span<const bool> frozen) {
  check_common(params.size(), lr, frozen);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!frozen.empty() && frozen[i]) continue;
    if (!params[i].has_grad()) continue;
    apply(params[i], params[i].grad(), lr);
  }
}

double clip_grad_norm(std::span<const Tensor> params, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip_grad_norm: max_norm must be > 0");
  double sq = 0.0;
  for (const Tensor& p : params) {
    for (double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double f = max_norm / norm;
    for (const Tensor& p : params) {
      for (double& g : p.impl()->grad) g *= f;
    }
  }
  return norm;
}

void zero_grads(std::span<const Tensor> params) {
  for (const Tensor& p : params) p.zero_grad();
}

}  // namespace bvqa
