#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bvqa/objectives/correlation.hpp"
#include "bvqa/objectives/logistic.hpp"
#include "bvqa/objectives/losses.hpp"
#include "bvqa/tensorkit/ops.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace bvqa;
using namespace bvqa::quality;
using bvqa::testing::gradcheck;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = 1.0,
                                  double hi = 5.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

Tensor as_tensor(const std::vector<double>& v, bool track = false) {
  return Tensor(Shape{v.size()}, v, track);
}

}  // namespace

TEST_CASE("plcc examples") {
  const std::vector<double> a{1, 2, 3};
  CHECK(plcc(a, a) == doctest::Approx(1.0));
  CHECK(plcc(a, std::vector<double>{1, 3, 2}) == doctest::Approx(0.5));
  CHECK(plcc(a, std::vector<double>{-1, -2, -3}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(plcc(a, std::vector<double>{2, 2, 2}), DegenerateInputError);
  CHECK_THROWS_AS(plcc(std::vector<double>{1}, std::vector<double>{1}), DegenerateInputError);
}

TEST_CASE("srcc examples") {
  CHECK(srcc(std::vector<double>{0.1, 0.4, 9.0}, std::vector<double>{2, 3, 4}) ==
        doctest::Approx(1.0));
  CHECK(srcc(std::vector<double>{1, 2, 3}, std::vector<double>{2, 1, 3}) == doctest::Approx(0.5));
  CHECK(srcc(std::vector<double>{1, 2, 3, 4}, std::vector<double>{4, 3, 2, 1}) ==
        doctest::Approx(-1.0));
  CHECK_THROWS_AS(srcc(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                  DegenerateInputError);
}

TEST_CASE("average ranks share ties") {
  CHECK(average_ranks(std::vector<double>{10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
  CHECK(average_ranks(std::vector<double>{10, 20, 20, 5}, true) ==
        std::vector<double>{3, 1.5, 1.5, 4});
}

TEST_CASE("metrics agree with textbook formulas and are symmetric") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 11;
    auto x = random_vector(rng, n);
    auto y = random_vector(rng, n);
    CHECK(std::abs(plcc(x, y) - testing::pearson_textbook(x, y)) <= 1e-10);
    CHECK(std::abs(srcc(x, y) - testing::spearman_rank_difference(x, y)) <= 1e-10);
    CHECK(plcc(x, y) == doctest::Approx(plcc(y, x)).epsilon(1e-14));
    CHECK(srcc(x, y) == doctest::Approx(srcc(y, x)).epsilon(1e-14));
  }
}

TEST_CASE("soft_rank") {
  SUBCASE("ties give the middle rank") {
    Tensor r = soft_rank(as_tensor({0.3, 0.3, 0.3}), 0.1);
    for (double v : r.data()) CHECK(v == doctest::Approx(2.0));
  }
  SUBCASE("small temperature approaches hard descending ranks") {
    Tensor r = soft_rank(as_tensor({0.1, 0.9, 0.5}), 1e-4);
    CHECK(std::abs(r[0] - 3) < 1e-3);
    CHECK(std::abs(r[1] - 1) < 1e-3);
    CHECK(std::abs(r[2] - 2) < 1e-3);
  }
  SUBCASE("ranks sum to n(n+1)/2 and stay inside (1, n)") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + trial % 9;
      Tensor r = soft_rank(as_tensor(random_vector(rng, n, -2, 2)), 0.05 + 0.01 * trial);
      double total = 0;
      for (double v : r.data()) {
        total += v;
        CHECK(v >= 1.0);
        CHECK(v <= double(n));
      }
      CHECK(total == doctest::Approx(double(n * (n + 1)) / 2.0).epsilon(1e-12));
    }
  }
  SUBCASE("non-positive temperature") {
    CHECK_THROWS_AS(soft_rank(as_tensor({1, 2}), 0.0), std::invalid_argument);
  }
}

TEST_CASE("soft-rank correlation converges to hard SRCC at small temperature") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + trial % 10;
    auto pred = random_vector(rng, n, 0, 1);
    auto mos = random_vector(rng, n);
    auto sorted = pred;
    std::sort(sorted.begin(), sorted.end());
    double gap = INFINITY;
    for (std::size_t i = 1; i < n; ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);
    REQUIRE(gap > 0);
    Tensor soft = soft_rank(as_tensor(pred), gap / 20.0);
    const double soft_corr = plcc(soft.data(), average_ranks(mos, true));
    CHECK(std::abs(soft_corr - srcc(pred, mos)) <= 0.01);
  }
}

TEST_CASE("plcc_loss") {
  const std::vector<double> mos{1.5, 4.0, 2.2, 3.1, 4.8};
  std::vector<double> affine(mos.size());
  for (std::size_t i = 0; i < mos.size(); ++i) affine[i] = 0.3 * mos[i] - 7.0;
  CHECK(std::abs(plcc_loss(as_tensor(affine), mos).item()) < 1e-12);
  std::vector<double> neg(mos.size());
  for (std::size_t i = 0; i < mos.size(); ++i) neg[i] = -mos[i];
  CHECK(plcc_loss(as_tensor(neg), mos).item() == doctest::Approx(1.0));
  CHECK_THROWS_AS(plcc_loss(as_tensor({2, 2, 2, 2, 2}), mos), DegenerateInputError);

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto pred = random_vector(rng, 6, -1, 1);
    auto target = random_vector(rng, 6);
    std::vector<double> shifted(6);
    const double a = 0.1 + trial, b = trial - 20.0;
    for (int i = 0; i < 6; ++i) shifted[i] = a * pred[i] + b;
    CHECK(std::abs(plcc_loss(as_tensor(pred), target).item() -
                   plcc_loss(as_tensor(shifted), target).item()) <= 1e-12);
  }
}

TEST_CASE("srcc_loss") {
  const std::vector<double> mos{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(srcc_loss(as_tensor({0.1, 0.2, 0.3, 0.4, 0.5}), mos, 1e-3).item() < 1e-3);
  CHECK(srcc_loss(as_tensor({0.5, 0.4, 0.3, 0.2, 0.1}), mos, 1e-4).item() ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(srcc_loss(as_tensor({0.1, 0.2, 0.3}), std::vector<double>{3, 3, 3}, 0.1),
                  DegenerateInputError);
}

TEST_CASE("total_loss mixes its components") {
  const std::vector<double> mos{1.0, 3.5, 2.0, 4.5};
  Tensor pred = as_tensor({0.2, 0.1, 0.7, 0.4});
  CHECK(total_loss(pred, mos, 1.0, 0.1).item() == plcc_loss(pred, mos).item());
  CHECK(total_loss(pred, mos, 0.0, 0.1).item() == srcc_loss(pred, mos, 0.1).item());
  CHECK(total_loss(pred, mos, 0.25, 0.1).item() ==
        doctest::Approx(0.25 * plcc_loss(pred, mos).item() +
                        0.75 * srcc_loss(pred, mos, 0.1).item()));
  CHECK(total_loss(as_tensor({1, 2, 3, 4}), std::vector<double>{1, 2, 3, 4}, 0.5, 1e-4).item() <
        1e-6);
  CHECK_THROWS_AS(total_loss(pred, mos, 1.5, 0.1), std::invalid_argument);
}

TEST_CASE("losses stay in [0, 1] and match finite differences") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 7;
    auto mos = random_vector(rng, n);
    Tensor pred = as_tensor(random_vector(rng, n, -1, 1), true);
    const double tau = 0.5;
    for (double v : {plcc_loss(pred, mos).item(), srcc_loss(pred, mos, tau).item(),
                     total_loss(pred, mos, 0.5, tau).item()}) {
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
    CHECK(gradcheck([&] { return plcc_loss(pred, mos); }, {pred}).max_rel_error <= 1e-4);
    CHECK(gradcheck([&] { return srcc_loss(pred, mos, tau); }, {pred}).max_rel_error <= 1e-4);
    CHECK(gradcheck([&] { return total_loss(pred, mos, 0.3, tau); }, {pred}).max_rel_error <=
          1e-4);
    Tensor scores = as_tensor(random_vector(rng, n, -1, 1), true);
    Tensor probe = as_tensor(random_vector(rng, n, -1, 1));
    CHECK(gradcheck([&] { return sum(mul(soft_rank(scores, 0.3), probe)); }, {scores})
              .max_rel_error <= 1e-4);
  }
}

TEST_CASE("fit_logistic4") {
  SUBCASE("recovers generating parameters") {
    const Logistic4 truth{5.0, 1.0, 0.5, 0.2};
    std::vector<double> x(50), y(50);
    for (int i = 0; i < 50; ++i) {
      x[i] = -0.5 + 2.0 * i / 49.0;
      y[i] = truth(x[i]);
    }
    LogisticFit fit = fit_logistic4(x, y);
    CHECK(std::abs(fit.curve.b1 - 5.0) < 1e-3);
    CHECK(std::abs(fit.curve.b2 - 1.0) < 1e-3);
    CHECK(std::abs(fit.curve.b3 - 0.5) < 1e-3);
    CHECK(std::abs(std::abs(fit.curve.b4) - 0.2) < 1e-3);
    CHECK(fit.mapped_plcc >= 0.9999);
  }
  SUBCASE("midpoint") {
    const Logistic4 f{4.2, 1.3, -0.7, 0.9};
    CHECK(f(-0.7) == doctest::Approx((4.2 + 1.3) / 2));
  }
  SUBCASE("linear targets") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      auto pred = random_vector(rng, 30, 0, 1);
      std::normal_distribution<double> noise(0, trial == 0 ? 0.0 : 0.1);
      std::vector<double> mos(30);
      for (int i = 0; i < 30; ++i) mos[i] = 1.0 + 4.0 * pred[i] + noise(rng);
      LogisticFit fit;
      try {
        fit = fit_logistic4(pred, mos);
      } catch (const LogisticFitError& e) {
        fit = e.best();
      }
      CHECK(fit.mapped_plcc >= plcc(pred, mos) - 1e-6);
    }
  }
  SUBCASE("degenerate inputs") {
    CHECK_THROWS_AS(fit_logistic4(std::vector<double>{1, 2, 3, 4},
                                  std::vector<double>{1, 2, 3, 4}),
                    DegenerateInputError);
    CHECK_THROWS_AS(fit_logistic4(std::vector<double>(6, 1.0), std::vector<double>{1, 2, 3, 4, 5, 6}),
                    DegenerateInputError);
  }
  SUBCASE("iteration cap surfaces the best iterate") {
    std::vector<double> x{0, 1, 2, 3, 4, 5, 6}, y{1, 1.2, 2.5, 3.1, 4.4, 4.8, 5};
    LogisticFitOptions tight;
    tight.max_iterations = 1;
    try {
      fit_logistic4(x, y, tight);
      FAIL("expected non-convergence");
    } catch (const LogisticFitError& e) {
      CHECK(e.best().iterations == 1);
      CHECK(std::isfinite(e.best().sse));
    }
  }
}
