#include "bvqa/tensorkit/ops.hpp"

#include <cmath>
#include <numeric>

#include "kernels.hpp"

namespace bvqa {

namespace {

enum class BinaryKind { Add, Sub, Mul, Div };

Tensor binary(const Tensor& a, const Tensor& b, BinaryKind kind, const char* name) {
  const std::size_t na = a.numel();
  const std::size_t nb = b.numel();
  Shape shape;
  if (a.shape() == b.shape() || nb == 1) {
    shape = a.shape();
  } else if (na == 1) {
    shape = b.shape();
  } else {
    throw ShapeError(std::string(name) + ": shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()) + " are not compatible");
  }
  const std::size_t n = shape_numel(shape);
  const bool bcast_a = na == 1 && n != 1;
  const bool bcast_b = nb == 1 && n != 1;
  auto ia = [bcast_a](std::size_t i) { return bcast_a ? 0 : i; };
  auto ib = [bcast_b](std::size_t i) { return bcast_b ? 0 : i; };

  auto av = a.data();
  auto bv = b.data();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = av[ia(i)];
    const double y = bv[ib(i)];
    switch (kind) {
      case BinaryKind::Add: out[i] = x + y; break;
      case BinaryKind::Sub: out[i] = x - y; break;
      case BinaryKind::Mul: out[i] = x * y; break;
      case BinaryKind::Div: out[i] = x / y; break;
    }
  }
  return make_result(std::move(shape), std::move(out), name, {a, b},
                     [a, b, kind, ia, ib](const detail::TensorImpl& self) {
                       std::vector<double>* ga = grad_sink(a);
                       std::vector<double>* gb = grad_sink(b);
                       auto av = a.data();
                       auto bv = b.data();
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         const double g = self.grad[i];
                         const double x = av[ia(i)];
                         const double y = bv[ib(i)];
                         switch (kind) {
                           case BinaryKind::Add:
                             if (ga) (*ga)[ia(i)] += g;
                             if (gb) (*gb)[ib(i)] += g;
                             break;
                           case BinaryKind::Sub:
                             if (ga) (*ga)[ia(i)] += g;
                             if (gb) (*gb)[ib(i)] -= g;
                             break;
                           case BinaryKind::Mul:
                             if (ga) (*ga)[ia(i)] += g * y;
                             if (gb) (*gb)[ib(i)] += g * x;
                             break;
                           case BinaryKind::Div:
                             if (ga) (*ga)[ia(i)] += g / y;
                             if (gb) (*gb)[ib(i)] -= g * x / (y * y);
                             break;
                         }
                       }
                     });
}

// Strides of a row-major shape.
std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) s[i - 1] = s[i] * shape[i];
  return s;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::Add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::Sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::Mul, "mul"); }
Tensor div(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::Div, "div"); }

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v *= factor;
  return make_result(x.shape(), std::move(out), "scale", {x},
                     [x, factor](const detail::TensorImpl& self) {
                       auto& gx = *grad_sink(x);
                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * self.grad[i];
                     });
}

Tensor add_scalar(const Tensor& x, double value) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v += value;
  return make_result(x.shape(), std::move(out), "add_scalar", {x},
                     [x](const detail::TensorImpl& self) {
                       auto& gx = *grad_sink(x);
                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
                     });
}

Tensor relu(const Tensor& x) {
  auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return make_result(x.shape(), std::move(out), "relu", {x}, [x](const detail::TensorImpl& self) {
    auto& gx = *grad_sink(x);
    auto xv = x.data();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += self.grad[i];
    }
  });
}

Tensor sigmoid(const Tensor& x) {
  auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-xv[i]));
  return make_result(x.shape(), std::move(out), "sigmoid", {x},
                     [x](const detail::TensorImpl& self) {
                       auto& gx = *grad_sink(x);
                       for (std::size_t i = 0; i < gx.size(); ++i) {
                         const double s = self.data[i];
                         gx[i] += self.grad[i] * s * (1.0 - s);
                       }
                     });
}

Tensor sqrt(const Tensor& x) {
  auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    if (xv[i] < 0.0) throw std::domain_error("sqrt: negative input");
    out[i] = std::sqrt(xv[i]);
  }
  return make_result(x.shape(), std::move(out), "sqrt", {x}, [x](const detail::TensorImpl& self) {
    auto& gx = *grad_sink(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] / (2.0 * self.data[i]);
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  return make_result(Shape{}, {s}, "sum", {x}, [x](const detail::TensorImpl& self) {
    auto& gx = *grad_sink(x);
    for (double& g : gx) g += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  const std::size_t n = x.numel();
  if (n == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(x), 1.0 / double(n));
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return make_result(std::move(shape), std::move(out), "reshape", {x},
                     [x](const detail::TensorImpl& self) {
                       auto& gx = *grad_sink(x);
                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
                     });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes) {
  const Shape& in = x.shape();
  const std::size_t r = in.size();
  if (axes.size() != r) throw ShapeError("permute: axis count does not match rank");
  std::vector<bool> used(r, false);
  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (axes[i] >= r || used[axes[i]]) throw ShapeError("permute: invalid axis list");
    used[axes[i]] = true;
    out_shape[i] = in[axes[i]];
  }
  const auto in_strides = strides_of(in);
  // Source offset for each destination element, walked with an odometer.
  const std::size_t n = x.numel();
  std::vector<std::size_t> src(n);
  std::vector<std::size_t> idx(r, 0);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = offset;
    for (std::size_t d = r; d-- > 0;) {
      ++idx[d];
      offset += in_strides[axes[d]];
      if (idx[d] < out_shape[d]) break;
      offset -= in_strides[axes[d]] * out_shape[d];
      idx[d] = 0;
    }
  }
  auto xv = x.data();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = xv[src[i]];
  return make_result(std::move(out_shape), std::move(out), "permute", {x},
                     [x, src = std::move(src)](const detail::TensorImpl& self) {
                       auto& gx = *grad_sink(x);
                       for (std::size_t i = 0; i < src.size(); ++i) gx[src[i]] += self.grad[i];
                     });
}

Tensor concat(const std::vector<Tensor>& xs, std::size_t axis) {
  if (xs.empty()) throw ShapeError("concat: empty input list");
  const Shape& first = xs.front().shape();
  if (axis >= first.size()) throw ShapeError("concat: axis out of range");
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor& t : xs) {
    const Shape& s = t.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) ok = false;
    }
    if (!ok) {
      throw ShapeError("concat: " + shape_str(s) + " does not match " + shape_str(first) +
                       " off axis " + std::to_string(axis));
    }
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];

  const std::size_t out_row = out_shape[axis] * inner;
  std::vector<double> out(shape_numel(out_shape));
  std::size_t col = 0;
  for (const Tensor& t : xs) {
    const std::size_t len = t.dim(axis) * inner;
    auto tv = t.data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(tv.begin() + o * len, len, out.begin() + o * out_row + col);
    }
    col += len;
  }
  return make_result(std::move(out_shape), std::move(out), "concat", xs,
                     [xs, axis, outer, inner, out_row](const detail::TensorImpl& self) {
                       std::size_t col = 0;
                       for (const Tensor& t : xs) {
                         const std::size_t len = t.dim(axis) * inner;
                         if (auto* g = grad_sink(t)) {
                           for (std::size_t o = 0; o < outer; ++o)
                             for (std::size_t j = 0; j < len; ++j)
                               (*g)[o * len + j] += self.grad[o * out_row + col + j];
                         }
                         col += len;
                       }
                     });
}

Tensor temporal_subsample(const Tensor& x, std::size_t stride, std::size_t axis) {
  if (stride < 1) throw std::invalid_argument("temporal_subsample: stride must be >= 1");
  const Shape& in = x.shape();
  if (axis >= in.size()) throw ShapeError("temporal_subsample: axis out of range");
  const std::size_t t = in[axis];
  if (t < 1) throw ShapeError("temporal_subsample: empty temporal axis");
  Shape out_shape = in;
  out_shape[axis] = (t + stride - 1) / stride;
  std::size_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= in[d];
  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < in.size(); ++d) inner *= in[d];

  const std::size_t kept = out_shape[axis];
  auto xv = x.data();
  std::vector<double> out(shape_numel(out_shape));
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < kept; ++k)
      std::copy_n(xv.begin() + (o * t + k * stride) * inner, inner,
                  out.begin() + (o * kept + k) * inner);
  return make_result(std::move(out_shape), std::move(out), "temporal_subsample", {x},
                     [x, outer, kept, inner, t, stride](const detail::TensorImpl& self) {
                       auto& gx = *grad_sink(x);
                       for (std::size_t o = 0; o < outer; ++o)
                         for (std::size_t k = 0; k < kept; ++k)
                           for (std::size_t j = 0; j < inner; ++j)
                             gx[(o * t + k * stride) * inner + j] +=
                                 self.grad[(o * kept + k) * inner + j];
                     });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() < 1 || weight.rank() != 2) {
    throw ShapeError("linear: expected x [..., Din] and W [Din, Dout]");
  }
  const std::size_t din = x.shape().back();
  if (weight.dim(0) != din) {
    throw ShapeError("linear: inner extents disagree, x " + shape_str(x.shape()) + " vs W " +
                     shape_str(weight.shape()));
  }
  const std::size_t dout = weight.dim(1);
  if (bias.defined() && bias.shape() != Shape{dout}) {
    throw ShapeError("linear: bias must be [" + std::to_string(dout) + "]");
  }
  const std::size_t rows = din == 0 ? 0 : x.numel() / din;
  Shape out_shape = x.shape();
  out_shape.back() = dout;
  std::vector<double> out(rows * dout);
  kernels::gemm(rows, dout, din, x.data().data(), din, weight.data().data(), dout, out.data(),
                dout, false);
  if (bias.defined()) {
    auto bv = bias.data();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < dout; ++j) out[r * dout + j] += bv[j];
  }
  return make_result(
      std::move(out_shape), std::move(out), "linear", {x, weight, bias},
      [x, weight, bias, rows, din, dout](const detail::TensorImpl& self) {
        const double* gy = self.grad.data();
        if (auto* gx = grad_sink(x)) {
          std::vector<double> wt(dout * din);
          kernels::transpose(din, dout, weight.data().data(), dout, wt.data(), din);
          kernels::gemm(rows, din, dout, gy, dout, wt.data(), din, gx->data(), din, true);
        }
        if (auto* gw = grad_sink(weight)) {
          std::vector<double> xt(din * rows);
          kernels::transpose(rows, din, x.data().data(), din, xt.data(), rows);
          kernels::gemm(din, dout, rows, xt.data(), rows, gy, dout, gw->data(), dout, true);
        }
        if (auto* gb = grad_sink(bias)) {
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < dout; ++j) (*gb)[j] += gy[r * dout + j];
        }
      });
}

Tensor gap_gsp_rows(const Tensor& x) {
  const Shape& s = x.shape();
  if (s.size() < 3) throw ShapeError("gap_gsp: expected [N, C, reduce...], got " + shape_str(s));
  const std::size_t n = s[0];
  const std::size_t c = s[1];
  const std::size_t reduce = shape_numel(Shape(s.begin() + 2, s.end()));
  if (reduce == 0 || c == 0) throw ShapeError("gap_gsp: empty reduce set in " + shape_str(s));

  auto xv = x.data();
  std::vector<double> out(n * 2 * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* p = xv.data() + (i * c + ch) * reduce;
      double total = 0.0;
      for (std::size_t k = 0; k < reduce; ++k) total += p[k];
      const double mu = total / double(reduce);
      double sq = 0.0;
      for (std::size_t k = 0; k < reduce; ++k) sq += (p[k] - mu) * (p[k] - mu);
      out[i * 2 * c + ch] = mu;
      out[i * 2 * c + c + ch] = std::sqrt(sq / double(reduce) + kGspEpsilon);
    }
  }
  return make_result(Shape{n, 2 * c}, std::move(out), "gap_gsp", {x},
                     [x, n, c, reduce](const detail::TensorImpl& self) {
                       auto& gx = *grad_sink(x);
                       auto xv = x.data();
                       const double inv = 1.0 / double(reduce);
                       for (std::size_t i = 0; i < n; ++i) {
                         for (std::size_t ch = 0; ch < c; ++ch) {
                           const double mu = self.data[i * 2 * c + ch];
                           const double sd = self.data[i * 2 * c + c + ch];
                           const double g_mu = self.grad[i * 2 * c + ch] * inv;
                           const double g_sd = self.grad[i * 2 * c + c + ch] * inv / sd;
                           const std::size_t base = (i * c + ch) * reduce;
                           for (std::size_t k = 0; k < reduce; ++k)
                             gx[base + k] += g_mu + g_sd * (xv[base + k] - mu);
                         }
                       }
                     });
}

Tensor gap_gsp(const Tensor& x) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw ShapeError("gap_gsp: expected [C, reduce...], got " + shape_str(s));
  Shape batched{1};
  batched.insert(batched.end(), s.begin(), s.end());
  return reshape(gap_gsp_rows(reshape(x, batched)), Shape{2 * s[0]});
}

}  // namespace bvqa
