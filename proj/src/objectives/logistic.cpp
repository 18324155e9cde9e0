#include "bvqa/objectives/logistic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "bvqa/objectives/correlation.hpp"

namespace bvqa::quality {

namespace {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<Vec4, 4>;

double logistic(const Vec4& c, double u) {
  const double a = std::abs(c[3]);
  return (c[0] - c[1]) / (1.0 + std::exp(-(u - c[2]) / a)) + c[1];
}

double sum_sq(const Vec4& c, std::span<const double> u, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = logistic(c, u[i]) - y[i];
    s += r * r;
  }
  return s;
}

// Gaussian elimination with partial pivoting; false when singular.
bool solve4(Mat4 a, Vec4 b, Vec4& x) {
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0 || !std::isfinite(a[piv][col])) return false;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (int r = col + 1; r < 4; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int k = col; k < 4; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  for (int r = 3; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < 4; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

double Logistic4::operator()(double x) const {
  return (b1 - b2) / (1.0 + std::exp(-(x - b3) / std::abs(b4))) + b2;
}

LogisticFit fit_logistic4(std::span<const double> pred, std::span<const double> mos,
                          const LogisticFitOptions& options) {
  if (pred.size() != mos.size()) throw DegenerateInputError("fit_logistic4: lengths differ");
  const std::size_t n = pred.size();
  if (n < 5) throw DegenerateInputError("fit_logistic4: need at least 5 points");

  const double mean = std::accumulate(pred.begin(), pred.end(), 0.0) / double(n);
  double var = 0.0;
  for (double p : pred) var += (p - mean) * (p - mean);
  const double sd = std::sqrt(var / double(n));
  if (sd == 0.0) throw DegenerateInputError("fit_logistic4: predictions are constant");
  const auto [lo, hi] = std::minmax_element(mos.begin(), mos.end());
  if (*lo == *hi) throw DegenerateInputError("fit_logistic4: targets are constant");

  // Work on standardized predictions; the initial guess becomes (max, min, 0, 1).
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = (pred[i] - mean) / sd;

  Vec4 c{*hi, *lo, 0.0, 1.0};
  double sse = sum_sq(c, u, mos);
  double y_energy = 0.0;
  for (double y : mos) y_energy += y * y;
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;

  for (; iter < options.max_iterations && !converged; ++iter) {
    Mat4 jtj{};
    Vec4 jtr{};
    const double a = std::abs(c[3]);
    const double sign = c[3] < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = 1.0 / (1.0 + std::exp(-(u[i] - c[2]) / a));
      const double ds = s * (1.0 - s);
      const double amp = c[0] - c[1];
      const Vec4 j{s, 1.0 - s, -amp * ds / a, -amp * ds * (u[i] - c[2]) / (a * a) * sign};
      const double r = (c[0] - c[1]) * s + c[1] - mos[i];
      for (int p = 0; p < 4; ++p) {
        jtr[p] += j[p] * r;
        for (int q = 0; q < 4; ++q) jtj[p][q] += j[p] * j[q];
      }
    }

    // Inner loop: raise damping until a step lowers the residual.
    while (true) {
      Mat4 damped = jtj;
      for (int p = 0; p < 4; ++p) damped[p][p] += lambda * std::max(jtj[p][p], 1e-12);
      Vec4 step{};
      Vec4 rhs{-jtr[0], -jtr[1], -jtr[2], -jtr[3]};
      Vec4 trial = c;
      double trial_sse = std::numeric_limits<double>::infinity();
      if (solve4(damped, rhs, step)) {
        for (int p = 0; p < 4; ++p) trial[p] += step[p];
        if (trial[3] != 0.0) trial_sse = sum_sq(trial, u, mos);
      }
      if (std::isfinite(trial_sse) && trial_sse < sse) {
        const double gain = sse - trial_sse;
        c = trial;
        sse = trial_sse;
        lambda = std::max(lambda / 10.0, 1e-12);
        if (gain <= options.relative_tolerance * (sse + gain) || sse <= 1e-28 * y_energy) {
          converged = true;
        }
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e16) {
        // No descent direction left: a stationary point.
        converged = true;
        break;
      }
    }
  }

  LogisticFit fit;
  fit.curve = Logistic4{c[0], c[1], mean + sd * c[2], std::abs(sd * c[3])};
  fit.sse = sse;
  fit.iterations = iter;
  std::vector<double> mapped(n);
  for (std::size_t i = 0; i < n; ++i) mapped[i] = logistic(c, u[i]);
  fit.mapped_plcc = plcc(mapped, mos);
  if (!converged) {
    throw LogisticFitError("fit_logistic4: no convergence after " +
                               std::to_string(options.max_iterations) + " iterations",
                           fit);
  }
  return fit;
}

}  // namespace bvqa::quality
