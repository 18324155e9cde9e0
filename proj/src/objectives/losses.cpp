#include "bvqa/objectives/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bvqa/objectives/correlation.hpp"
#include "bvqa/tensorkit/ops.hpp"

namespace bvqa::quality {

namespace {

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

void check_inputs(const Tensor& pred, std::span<const double> mos, const char* who) {
  if (pred.numel() != mos.size()) {
    throw DegenerateInputError(std::string(who) + ": " + std::to_string(pred.numel()) +
                               " predictions for " + std::to_string(mos.size()) + " targets");
  }
  if (mos.size() < 2) throw DegenerateInputError(std::string(who) + ": need at least 2 scores");
  if (is_constant(pred.data())) {
    throw DegenerateInputError(std::string(who) + ": predictions are constant");
  }
  if (is_constant(mos)) throw DegenerateInputError(std::string(who) + ": targets are all tied");
}

Tensor centered(const Tensor& x) { return sub(x, mean(x)); }

}  // namespace

Tensor soft_rank(const Tensor& scores, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("soft_rank: temperature must be positive");
  const std::size_t n = scores.numel();
  auto s = scores.data();
  std::vector<double> r(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) r[i] += 1.0 / (1.0 + std::exp(-(s[j] - s[i]) / tau));
    }
  }
  return make_result(scores.shape(), std::move(r), "soft_rank", {scores},
                     [scores, tau, n](const detail::TensorImpl& self) {
                       auto& gs = *grad_sink(scores);
                       auto s = scores.data();
                       for (std::size_t i = 0; i < n; ++i) {
                         for (std::size_t j = 0; j < n; ++j) {
                           if (j == i) continue;
                           const double sig = 1.0 / (1.0 + std::exp(-(s[j] - s[i]) / tau));
                           const double d = self.grad[i] * sig * (1.0 - sig) / tau;
                           gs[j] += d;
                           gs[i] -= d;
                         }
                       }
                     });
}

Tensor pearson(const Tensor& x, const Tensor& y) {
  if (x.numel() != y.numel() || x.numel() < 2) {
    throw DegenerateInputError("pearson: need two vectors of equal length >= 2");
  }
  if (is_constant(x.data()) || is_constant(y.data())) {
    throw DegenerateInputError("pearson: correlation is undefined for a constant vector");
  }
  const Tensor xc = centered(reshape(x, {x.numel()}));
  const Tensor yc = centered(reshape(y, {y.numel()}));
  const Tensor cov = sum(mul(xc, yc));
  const Tensor norm = sqrt(mul(sum(mul(xc, xc)), sum(mul(yc, yc))));
  return div(cov, norm);
}

Tensor plcc_loss(const Tensor& pred, std::span<const double> mos) {
  check_inputs(pred, mos, "plcc_loss");
  const Tensor target(Shape{mos.size()}, {mos.begin(), mos.end()});
  return scale(add_scalar(scale(pearson(pred, target), -1.0), 1.0), 0.5);
}

Tensor srcc_loss(const Tensor& pred, std::span<const double> mos, double tau) {
  check_inputs(pred, mos, "srcc_loss");
  const std::size_t n = mos.size();
  const Tensor flat = reshape(pred, {n});
  const Tensor c = centered(flat);
  const Tensor sd = sqrt(scale(sum(mul(c, c)), 1.0 / double(n)));
  const Tensor ranks = soft_rank(div(flat, sd), tau);
  const Tensor target(Shape{n}, average_ranks(mos, /*descending=*/true));
  return scale(add_scalar(scale(pearson(ranks, target), -1.0), 1.0), 0.5);
}

Tensor total_loss(const Tensor& pred, std::span<const double> mos, double alpha, double tau) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("total_loss: alpha must lie in [0, 1]");
  }
  if (alpha == 1.0) return plcc_loss(pred, mos);
  if (alpha == 0.0) return srcc_loss(pred, mos, tau);
  return add(scale(plcc_loss(pred, mos), alpha), scale(srcc_loss(pred, mos, tau), 1.0 - alpha));
}

}  // namespace bvqa::quality
