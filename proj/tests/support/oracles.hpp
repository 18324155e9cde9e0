#pragma once

// Brute-force reference implementations used only by tests. They share no
// code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bvqa/tensorkit/conv.hpp"

namespace bvqa::testing {

/// Direct-summation cross-correlation on [N,C,T,H,W] data.
inline std::vector<double> direct_conv3d(const std::vector<double>& x, std::size_t n,
                                         std::size_t c, std::size_t t, std::size_t h,
                                         std::size_t w, const ConvSpec& s,
                                         const std::vector<double>& weight,
                                         const std::vector<double>& bias) {
  const std::size_t ot = (t + 2 * s.padding[0] - s.kernel[0]) / s.stride[0] + 1;
  const std::size_t oh = (h + 2 * s.padding[1] - s.kernel[1]) / s.stride[1] + 1;
  const std::size_t ow = (w + 2 * s.padding[2] - s.kernel[2]) / s.stride[2] + 1;
  const std::size_t o_n = s.out_channels;
  std::vector<double> out(n * o_n * ot * oh * ow, 0.0);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < o_n; ++o)
      for (std::size_t a = 0; a < ot; ++a)
        for (std::size_t i = 0; i < oh; ++i)
          for (std::size_t j = 0; j < ow; ++j) {
            double acc = bias.empty() ? 0.0 : bias[o];
            for (std::size_t ci = 0; ci < c; ++ci)
              for (std::size_t kt = 0; kt < s.kernel[0]; ++kt)
                for (std::size_t kh = 0; kh < s.kernel[1]; ++kh)
                  for (std::size_t kw = 0; kw < s.kernel[2]; ++kw) {
                    const long it = long(a * s.stride[0] + kt) - long(s.padding[0]);
                    const long ih = long(i * s.stride[1] + kh) - long(s.padding[1]);
                    const long iw = long(j * s.stride[2] + kw) - long(s.padding[2]);
                    if (it < 0 || ih < 0 || iw < 0 || it >= long(t) || ih >= long(h) ||
                        iw >= long(w))
                      continue;
                    const double xv =
                        x[(((b * c + ci) * t + it) * h + ih) * w + iw];
                    const double wv =
                        weight[(((o * c + ci) * s.kernel[0] + kt) * s.kernel[1] + kh) *
                                   s.kernel[2] +
                               kw];
                    acc += xv * wv;
                  }
            out[(((b * o_n + o) * ot + a) * oh + i) * ow + j] = acc;
          }
  return out;
}

/// Textbook Pearson correlation via raw sums, in extended precision to keep
/// the single-pass cancellation below the comparison tolerance.
inline double pearson_textbook(const std::vector<double>& x, const std::vector<double>& y) {
  const long double n = x.size();
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += (long double)x[i] * x[i];
    syy += (long double)y[i] * y[i];
    sxy += (long double)x[i] * y[i];
  }
  return double((n * sxy - sx * sy) / sqrtl((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

/// Ascending ranks with ties averaged, by pairwise counting.
inline std::vector<double> ranks_by_counting(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) less += 1;
      if (v[j] == v[i]) equal += 1;
    }
    r[i] = less + (equal + 1) / 2.0;
  }
  return r;
}

/// Spearman for tie-free data: 1 - 6 sum d^2 / (n (n^2 - 1)).
inline double spearman_rank_difference(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks_by_counting(x);
  const auto ry = ranks_by_counting(y);
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = double(x.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace bvqa::testing
