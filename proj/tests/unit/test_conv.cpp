#include <doctest.h>

#include <random>

#include "bvqa/tensorkit/conv.hpp"
#include "bvqa/tensorkit/ops.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace bvqa;
using bvqa::testing::gradcheck;
using bvqa::testing::random_tensor;

namespace {

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

ConvSpec random_spec(std::mt19937_64& rng, bool temporal) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  ConvSpec s;
  s.in_channels = pick(1, 3);
  s.out_channels = pick(1, 4);
  for (std::size_t a = temporal ? 0 : 1; a < 3; ++a) {
    s.kernel[a] = pick(1, 3);
    s.stride[a] = pick(1, 2);
    s.padding[a] = pick(0, s.kernel[a] / 2 + 1);
  }
  return s;
}

}  // namespace

TEST_CASE("conv examples") {
  SUBCASE("1D-style cross-correlation") {
    Tensor x(Shape{1, 1, 1, 3}, {1, 2, 3});
    Tensor w(Shape{1, 1, 1, 3}, {1, 0, -1});
    Tensor y = conv(x, ConvSpec::conv3d(1, 1, {1, 1, 3}, {1, 1, 1}, {0, 0, 0}), w,
                    Tensor::zeros({1}));
    CHECK(values(y) == std::vector<double>{-2});
  }
  SUBCASE("zero input propagates") {
    std::mt19937_64 rng(1);
    ConvSpec s = ConvSpec::conv2d(2, 3, 3, 1, 1);
    Tensor y = conv(Tensor::zeros({1, 2, 5, 5}), s, random_tensor(rng, s.weight_shape()),
                    Tensor::zeros({3}));
    for (double v : y.data()) CHECK(v == 0.0);
  }
  SUBCASE("fast pathway stem on 4 frames of 224x224") {
    ConvSpec s = ConvSpec::conv3d(3, 8, {5, 7, 7}, {1, 2, 2}, {2, 3, 3});
    NoGradGuard guard;
    Tensor y = conv(Tensor::zeros({1, 3, 4, 224, 224}), s, Tensor::zeros(s.weight_shape()),
                    Tensor::zeros({8}));
    CHECK(y.shape() == Shape{1, 8, 4, 112, 112});
  }
  SUBCASE("errors") {
    ConvSpec s = ConvSpec::conv2d(2, 3, 3, 1, 0);
    CHECK_THROWS_AS(conv(Tensor::zeros({1, 1, 5, 5}), s, Tensor::zeros(s.weight_shape()),
                         Tensor()),
                    ShapeError);
    CHECK_THROWS_AS(conv(Tensor::zeros({1, 2, 2, 2}), s, Tensor::zeros(s.weight_shape()),
                         Tensor()),
                    ShapeError);
    CHECK_THROWS_AS(conv(Tensor::zeros({1, 2, 5, 5}), s, Tensor::zeros({3, 2, 2, 2}), Tensor()),
                    ShapeError);
  }
}

TEST_CASE("conv shape law and direct-summation agreement on random specs") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const bool temporal = trial % 2 == 0;
    ConvSpec s = random_spec(rng, temporal);
    const std::size_t n = 1 + trial % 2;
    const std::size_t t = temporal ? std::uniform_int_distribution<std::size_t>(3, 5)(rng) : 1;
    const std::size_t h = std::uniform_int_distribution<std::size_t>(3, 7)(rng);
    const std::size_t w = std::uniform_int_distribution<std::size_t>(3, 7)(rng);
    Tensor x = random_tensor(rng, {n, s.in_channels, t, h, w}, -1, 1, false);
    Tensor wt = random_tensor(rng, s.weight_shape(), -1, 1, false);
    Tensor b = random_tensor(rng, {s.out_channels}, -1, 1, false);
    Tensor y = conv(x, s, wt, b);
    const Shape expect{n, s.out_channels, (t + 2 * s.padding[0] - s.kernel[0]) / s.stride[0] + 1,
                       (h + 2 * s.padding[1] - s.kernel[1]) / s.stride[1] + 1,
                       (w + 2 * s.padding[2] - s.kernel[2]) / s.stride[2] + 1};
    REQUIRE(y.shape() == expect);
    const auto ref = testing::direct_conv3d(values(x), n, s.in_channels, t, h, w, s, values(wt),
                                            values(b));
    double worst = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(ref[i] - y[i]));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("conv is linear in its input") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    ConvSpec s = random_spec(rng, true);
    Tensor x = random_tensor(rng, {1, s.in_channels, 4, 6, 6}, -1, 1, false);
    Tensor z = random_tensor(rng, {1, s.in_channels, 4, 6, 6}, -1, 1, false);
    Tensor w = random_tensor(rng, s.weight_shape(), -1, 1, false);
    const double alpha = 1.7, beta = -0.4;
    Tensor lhs = conv(add(scale(x, alpha), scale(z, beta)), s, w, Tensor());
    Tensor rhs = add(scale(conv(x, s, w, Tensor()), alpha), scale(conv(z, s, w, Tensor()), beta));
    for (std::size_t i = 0; i < lhs.numel(); ++i) CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-10);
  }
}

TEST_CASE("conv and max_pool gradients match central differences") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    ConvSpec s3 = random_spec(rng, true);
    Tensor x = random_tensor(rng, {1, s3.in_channels, 3, 4, 4});
    Tensor w = random_tensor(rng, s3.weight_shape());
    Tensor b = random_tensor(rng, {s3.out_channels});
    Tensor probe;
    auto loss3 = [&] {
      Tensor y = conv(x, s3, w, b);
      if (!probe.defined()) probe = random_tensor(rng, y.shape(), -1, 1, false);
      return sum(mul(y, probe));
    };
    CHECK(gradcheck(loss3, {x, w, b}).max_rel_error < 1e-4);

    ConvSpec s2 = ConvSpec::conv2d(2, 3, 3, 1 + trial % 2, 1);
    Tensor x2 = random_tensor(rng, {2, 2, 5, 5});
    Tensor w2 = random_tensor(rng, s2.weight_shape());
    Tensor b2 = random_tensor(rng, {3});
    CHECK(gradcheck([&] { return sum(relu(conv(x2, s2, w2, b2))); }, {x2, w2, b2}).max_rel_error <
          1e-4);

    Tensor xp = random_tensor(rng, {1, 2, 2, 5, 5});
    PoolSpec p{{1, 3, 3}, {1, 2, 2}, {0, 1, 1}};
    Tensor pw;
    auto lossp = [&] {
      Tensor y = max_pool(xp, p);
      if (!pw.defined()) pw = random_tensor(rng, y.shape(), -1, 1, false);
      return sum(mul(y, pw));
    };
    CHECK(gradcheck(lossp, {xp}).max_rel_error < 1e-4);
  }
}

TEST_CASE("conv forward and backward are deterministic") {
  std::mt19937_64 rng(5);
  ConvSpec s = ConvSpec::conv3d(3, 16, {3, 3, 3}, {1, 2, 2}, {1, 1, 1});
  Tensor x = random_tensor(rng, {1, 3, 6, 20, 20}, -1, 1, false);
  Tensor w = random_tensor(rng, s.weight_shape());
  auto run = [&] {
    w.zero_grad();
    Tensor y = conv(x, s, w, Tensor());
    sum(mul(y, y)).backward();
    std::vector<double> out = values(y);
    out.insert(out.end(), w.grad().begin(), w.grad().end());
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("max_pool geometry") {
  Tensor x(Shape{1, 1, 3, 3}, {1, 5, 2, 0, 3, 4, 9, 1, 1});
  PoolSpec p{{1, 3, 3}, {1, 2, 2}, {0, 1, 1}};
  Tensor y = max_pool(x, p);
  CHECK(y.shape() == Shape{1, 1, 2, 2});
  CHECK(values(y) == std::vector<double>{5, 5, 9, 4});
  CHECK(max_pool(Tensor::zeros({1, 64, 4, 112, 112}), p).shape() == Shape{1, 64, 4, 56, 56});
}
