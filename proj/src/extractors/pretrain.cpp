#include "bvqa/extractors/pretrain.hpp"

#include <cmath>
#include <stdexcept>

#include "bvqa/dataset/rng.hpp"
#include "bvqa/tensorkit/ops.hpp"
#include "bvqa/tensorkit/optim.hpp"

namespace bvqa::extract {

namespace {
constexpr double kPretrainClip = 1.0;
}

PretrainResult pretrain_sharpness(const NetworkSpec& spec, const NetworkParams& params,
                                  std::span<const data::LabeledImage> images, std::size_t epochs,
                                  double lr, std::uint64_t seed, std::size_t batch_size) {
  if (spec.variant != Variant::Sharpness2d) {
    throw std::invalid_argument("pretrain_sharpness: needs the sharpness2d network");
  }
  if (images.empty()) throw std::invalid_argument("pretrain_sharpness: no images");
  if (!(lr >= 0.0)) throw std::invalid_argument("pretrain_sharpness: lr must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("pretrain_sharpness: batch_size must be >= 1");

  const std::size_t n = images.size();
  const Shape& s0 = images[0].image.shape();
  std::vector<double> pixels;
  std::vector<double> labels;
  double label_mean = 0.0;
  for (const auto& im : images) {
    if (im.image.shape() != s0) throw ShapeError("pretrain_sharpness: images differ in shape");
    pixels.insert(pixels.end(), im.image.data().begin(), im.image.data().end());
    labels.push_back(im.mos);
    label_mean += im.mos / double(n);
  }
  const Tensor all(Shape{n, s0[0], s0[1], s0[2]}, std::move(pixels));
  const std::size_t image_numel = shape_numel(s0);

  PretrainResult out;
  out.params = params.clone();
  const std::size_t d = spec.feature_width;

  // The head sees features standardized with their initial statistics:
  // W = v / sd, b = c - mu.W, so v and c are well scaled from the start.
  std::vector<double> mu(d, 0.0), inv_sd(d, 0.0);
  {
    NoGradGuard no_grad;
    const Tensor f = frame_features(spec, out.params, all);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) mu[j] += f[i * d + j] / double(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) inv_sd[j] += std::pow(f[i * d + j] - mu[j], 2) / double(n);
    }
    for (double& v : inv_sd) v = 1.0 / std::sqrt(v + 1e-12);
  }
  const Tensor mu_t(Shape{d, 1}, mu);
  const Tensor inv_sd_t(Shape{d, 1}, inv_sd);
  data::Rng rng(data::derive_seed(seed, "pretrain_head"));
  std::vector<double> w(d);
  const double bound = std::sqrt(1.0 / double(d));
  for (double& v : w) v = rng.uniform(-bound, bound);
  const Tensor head_v(Shape{d, 1}, std::move(w), true);
  const Tensor head_c(Shape{1}, {label_mean}, true);

  std::vector<Tensor> trainable = out.params.trainable();
  trainable.push_back(head_v);
  trainable.push_back(head_c);

  auto mse = [&](const Tensor& images, const Tensor& target) {
    const Tensor weight = mul(head_v, inv_sd_t);
    const Tensor bias = sub(head_c, sum(mul(mu_t, weight)));
    const Tensor diff = sub(linear(frame_features(spec, out.params, images), weight, bias), target);
    return mean(mul(diff, diff));
  };
  const Tensor all_labels(Shape{n, 1}, labels);
  auto full_mse = [&] {
    NoGradGuard no_grad;
    return mse(all, all_labels).item();
  };

  data::Rng order_rng(data::derive_seed(seed, "pretrain_order"));
  std::vector<std::size_t> order(n);
  for (std::size_t e = 0; e < epochs; ++e) {
    out.loss_trace.push_back(full_mse());
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t stop = std::min(n, start + batch_size);
      std::vector<double> px, lb;
      for (std::size_t k = start; k < stop; ++k) {
        auto src = all.data().subspan(order[k] * image_numel, image_numel);
        px.insert(px.end(), src.begin(), src.end());
        lb.push_back(labels[order[k]]);
      }
      const std::size_t m = stop - start;
      zero_grads(trainable);
      mse(Tensor(Shape{m, s0[0], s0[1], s0[2]}, std::move(px)), Tensor(Shape{m, 1}, lb)).backward();
      clip_grad_norm(trainable, kPretrainClip);
      sgd_step(trainable, lr);
    }
  }
  out.loss_trace.push_back(full_mse());
  NoGradGuard no_grad;
  const Tensor weight = mul(head_v, inv_sd_t);
  out.head_weight = Tensor(weight.shape(), {weight.data().begin(), weight.data().end()});
  out.head_bias = sub(head_c, sum(mul(mu_t, weight))).item();
  return out;
}

}  // namespace bvqa::extract
