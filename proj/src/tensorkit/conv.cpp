#include "bvqa/tensorkit/conv.hpp"

#include <algorithm>
#include <limits>

#include "kernels.hpp"

namespace bvqa {

namespace {

constexpr const char* kAxisNames[3] = {"T", "H", "W"};

std::size_t window_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                          std::size_t pad, std::size_t axis, const char* who) {
  const std::size_t padded = in + 2 * pad;
  if (padded < kernel) {
    throw ShapeError(std::string(who) + ": " + kAxisNames[axis] + " extent " +
                     std::to_string(in) + " (+2*" + std::to_string(pad) +
                     " padding) is smaller than kernel " + std::to_string(kernel));
  }
  return (padded - kernel) / stride + 1;
}

// Geometry of one convolution call, normalized to 5D.
struct Geometry {
  std::size_t n, c, t, h, w;
  std::size_t o, ot, oh, ow;
  std::size_t k;  // C * kT * kH * kW
  std::size_t p;  // oT * oH * oW
  std::size_t in_plane;  // T * H * W
};

// Copies the receptive fields of output positions [p0, p0 + cols) into
// col[K, cols].
void im2col(const double* x, const Geometry& g, const ConvSpec& s, std::size_t p0,
            std::size_t cols, double* col) {
  const std::size_t kt_n = s.kernel[0], kh_n = s.kernel[1], kw_n = s.kernel[2];
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < g.c; ++ci) {
    const double* xc = x + ci * g.in_plane;
    for (std::size_t kt = 0; kt < kt_n; ++kt) {
      for (std::size_t kh = 0; kh < kh_n; ++kh) {
        for (std::size_t kw = 0; kw < kw_n; ++kw, ++row) {
          double* dst = col + row * cols;
          std::size_t ow = p0 % g.ow;
          std::size_t oh = (p0 / g.ow) % g.oh;
          std::size_t ot = p0 / (g.ow * g.oh);
          for (std::size_t j = 0; j < cols; ++j) {
            const long it = long(ot * s.stride[0] + kt) - long(s.padding[0]);
            const long ih = long(oh * s.stride[1] + kh) - long(s.padding[1]);
            const long iw = long(ow * s.stride[2] + kw) - long(s.padding[2]);
            const bool inside = it >= 0 && it < long(g.t) && ih >= 0 && ih < long(g.h) &&
                                iw >= 0 && iw < long(g.w);
            dst[j] = inside ? xc[(std::size_t(it) * g.h + std::size_t(ih)) * g.w + std::size_t(iw)]
                            : 0.0;
            if (++ow == g.ow) {
              ow = 0;
              if (++oh == g.oh) {
                oh = 0;
                ++ot;
              }
            }
          }
        }
      }
    }
  }
}

// Scatter-adds col[K, cols] back onto the input gradient.
void col2im(const double* col, const Geometry& g, const ConvSpec& s, std::size_t p0,
            std::size_t cols, double* dx) {
  const std::size_t kt_n = s.kernel[0], kh_n = s.kernel[1], kw_n = s.kernel[2];
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < g.c; ++ci) {
    double* dc = dx + ci * g.in_plane;
    for (std::size_t kt = 0; kt < kt_n; ++kt) {
      for (std::size_t kh = 0; kh < kh_n; ++kh) {
        for (std::size_t kw = 0; kw < kw_n; ++kw, ++row) {
          const double* src = col + row * cols;
          std::size_t ow = p0 % g.ow;
          std::size_t oh = (p0 / g.ow) % g.oh;
          std::size_t ot = p0 / (g.ow * g.oh);
          for (std::size_t j = 0; j < cols; ++j) {
            const long it = long(ot * s.stride[0] + kt) - long(s.padding[0]);
            const long ih = long(oh * s.stride[1] + kh) - long(s.padding[1]);
            const long iw = long(ow * s.stride[2] + kw) - long(s.padding[2]);
            if (it >= 0 && it < long(g.t) && ih >= 0 && ih < long(g.h) && iw >= 0 &&
                iw < long(g.w)) {
              dc[(std::size_t(it) * g.h + std::size_t(ih)) * g.w + std::size_t(iw)] += src[j];
            }
            if (++ow == g.ow) {
              ow = 0;
              if (++oh == g.oh) {
                oh = 0;
                ++ot;
              }
            }
          }
        }
      }
    }
  }
}

bool is_pointwise(const ConvSpec& s) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (s.kernel[a] != 1 || s.stride[a] != 1 || s.padding[a] != 0) return false;
  }
  return true;
}

std::size_t block_columns(const Geometry& g) {
  const std::size_t target = (std::size_t(1) << 18) / std::max<std::size_t>(g.k, 1);
  std::size_t cols = std::clamp<std::size_t>(target, 32, 4096);
  cols = (cols + 7) / 8 * 8;
  return std::min(cols, g.p);
}

}  // namespace

ConvSpec ConvSpec::conv2d(std::size_t in, std::size_t out, std::size_t kernel,
                          std::size_t stride, std::size_t padding) {
  ConvSpec s;
  s.kernel = {1, kernel, kernel};
  s.stride = {1, stride, stride};
  s.padding = {0, padding, padding};
  s.in_channels = in;
  s.out_channels = out;
  return s;
}

ConvSpec ConvSpec::conv3d(std::size_t in, std::size_t out, std::array<std::size_t, 3> kernel,
                          std::array<std::size_t, 3> stride, std::array<std::size_t, 3> padding) {
  ConvSpec s;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  s.in_channels = in;
  s.out_channels = out;
  return s;
}

void ConvSpec::validate() const {
  for (std::size_t a = 0; a < 3; ++a) {
    if (kernel[a] < 1 || stride[a] < 1) {
      throw std::invalid_argument("conv spec: kernel and stride extents must be >= 1");
    }
  }
  if (in_channels < 1 || out_channels < 1) {
    throw std::invalid_argument("conv spec: channel counts must be >= 1");
  }
}

std::size_t ConvSpec::output_extent(std::size_t axis, std::size_t in) const {
  return window_extent(in, kernel.at(axis), stride[axis], padding[axis], axis, "conv");
}

Shape ConvSpec::weight_shape() const {
  return {out_channels, in_channels, kernel[0], kernel[1], kernel[2]};
}

std::size_t PoolSpec::output_extent(std::size_t axis, std::size_t in) const {
  return window_extent(in, kernel.at(axis), stride[axis], padding[axis], axis, "max_pool");
}

Tensor conv(const Tensor& x, const ConvSpec& spec, const Tensor& weight, const Tensor& bias) {
  spec.validate();
  const Shape& xs = x.shape();
  const bool planar = xs.size() == 4;
  if (!planar && xs.size() != 5) {
    throw ShapeError("conv: expected [N,C,H,W] or [N,C,T,H,W], got " + shape_str(xs));
  }
  if (planar && (spec.kernel[0] != 1 || spec.padding[0] != 0)) {
    throw ShapeError("conv: 4D input requires a kernel with kT = 1 and no temporal padding");
  }
  Geometry g{};
  g.n = xs[0];
  g.c = xs[1];
  g.t = planar ? 1 : xs[2];
  g.h = xs[xs.size() - 2];
  g.w = xs[xs.size() - 1];
  if (g.c != spec.in_channels) {
    throw ShapeError("conv: input has " + std::to_string(g.c) + " channels, spec expects " +
                     std::to_string(spec.in_channels));
  }
  const Shape wshape = spec.weight_shape();
  const Shape wshape2d{spec.out_channels, spec.in_channels, spec.kernel[1], spec.kernel[2]};
  if (weight.shape() != wshape && !(spec.kernel[0] == 1 && weight.shape() == wshape2d)) {
    throw ShapeError("conv: weight shape " + shape_str(weight.shape()) + ", expected " +
                     shape_str(wshape));
  }
  g.o = spec.out_channels;
  if (bias.defined() && bias.shape() != Shape{g.o}) {
    throw ShapeError("conv: bias shape " + shape_str(bias.shape()) + ", expected [" +
                     std::to_string(g.o) + "]");
  }
  g.ot = planar ? 1 : spec.output_extent(0, g.t);
  g.oh = spec.output_extent(1, g.h);
  g.ow = spec.output_extent(2, g.w);
  g.k = spec.fan_in();
  g.p = g.ot * g.oh * g.ow;
  g.in_plane = g.t * g.h * g.w;

  Shape out_shape = planar ? Shape{g.n, g.o, g.oh, g.ow} : Shape{g.n, g.o, g.ot, g.oh, g.ow};
  std::vector<double> out(g.n * g.o * g.p);
  const double* xv = x.data().data();
  const double* wv = weight.data().data();
  const bool pointwise = is_pointwise(spec);
  const std::size_t block = block_columns(g);
  std::vector<double> col(pointwise ? 0 : g.k * block);

  for (std::size_t b = 0; b < g.n; ++b) {
    const double* xb = xv + b * g.c * g.in_plane;
    double* ob = out.data() + b * g.o * g.p;
    if (pointwise) {
      kernels::gemm(g.o, g.p, g.k, wv, g.k, xb, g.in_plane, ob, g.p, false);
    } else {
      for (std::size_t p0 = 0; p0 < g.p; p0 += block) {
        const std::size_t cols = std::min(block, g.p - p0);
        im2col(xb, g, spec, p0, cols, col.data());
        kernels::gemm(g.o, cols, g.k, wv, g.k, col.data(), cols, ob + p0, g.p, false);
      }
    }
    if (bias.defined()) {
      auto bv = bias.data();
      for (std::size_t oc = 0; oc < g.o; ++oc) {
        double* row = ob + oc * g.p;
        for (std::size_t j = 0; j < g.p; ++j) row[j] += bv[oc];
      }
    }
  }

  return make_result(
      std::move(out_shape), std::move(out), "conv", {x, weight, bias},
      [x, spec, weight, bias, g, pointwise, block](const detail::TensorImpl& self) {
        const double* gy = self.grad.data();
        const double* xv = x.data().data();
        std::vector<double>* gx = grad_sink(x);
        std::vector<double>* gw = grad_sink(weight);
        std::vector<double>* gb = grad_sink(bias);

        std::vector<double> wt;
        if (gx) {
          wt.resize(g.k * g.o);
          kernels::transpose(g.o, g.k, weight.data().data(), g.k, wt.data(), g.o);
        }
        std::vector<double> col(pointwise ? 0 : g.k * block);
        std::vector<double> rows(gw ? g.k * block : 0);

        for (std::size_t b = 0; b < g.n; ++b) {
          const double* xb = xv + b * g.c * g.in_plane;
          const double* gyb = gy + b * g.o * g.p;
          for (std::size_t p0 = 0; p0 < g.p; p0 += block) {
            const std::size_t cols = std::min(block, g.p - p0);
            if (gw) {
              // dW[O,K] += dY[O,cols] * patches[cols,K]
              if (pointwise) {
                kernels::transpose(g.k, cols, xb + p0, g.in_plane, rows.data(), g.k);
              } else {
                im2col(xb, g, spec, p0, cols, col.data());
                kernels::transpose(g.k, cols, col.data(), cols, rows.data(), g.k);
              }
              kernels::gemm(g.o, g.k, cols, gyb + p0, g.p, rows.data(), g.k, gw->data(), g.k,
                            true);
            }
            if (gx) {
              double* gxb = gx->data() + b * g.c * g.in_plane;
              if (pointwise) {
                kernels::gemm(g.k, cols, g.o, wt.data(), g.o, gyb + p0, g.p, gxb + p0, g.in_plane,
                              true);
              } else {
                kernels::gemm(g.k, cols, g.o, wt.data(), g.o, gyb + p0, g.p, col.data(), cols,
                              false);
                col2im(col.data(), g, spec, p0, cols, gxb);
              }
            }
          }
          if (gb) {
            for (std::size_t oc = 0; oc < g.o; ++oc) {
              const double* row = gyb + oc * g.p;
              double s = 0.0;
              for (std::size_t j = 0; j < g.p; ++j) s += row[j];
              (*gb)[oc] += s;
            }
          }
        }
      });
}

Tensor max_pool(const Tensor& x, const PoolSpec& spec) {
  const Shape& xs = x.shape();
  const bool planar = xs.size() == 4;
  if (!planar && xs.size() != 5) {
    throw ShapeError("max_pool: expected [N,C,H,W] or [N,C,T,H,W], got " + shape_str(xs));
  }
  for (std::size_t a = 0; a < 3; ++a) {
    if (spec.kernel[a] < 1 || spec.stride[a] < 1 || spec.padding[a] >= spec.kernel[a]) {
      throw std::invalid_argument("max_pool: need kernel, stride >= 1 and padding < kernel");
    }
  }
  if (planar && (spec.kernel[0] != 1 || spec.padding[0] != 0)) {
    throw ShapeError("max_pool: 4D input requires kT = 1");
  }
  const std::size_t n = xs[0], c = xs[1];
  const std::size_t t = planar ? 1 : xs[2];
  const std::size_t h = xs[xs.size() - 2], w = xs[xs.size() - 1];
  const std::size_t ot = planar ? 1 : spec.output_extent(0, t);
  const std::size_t oh = spec.output_extent(1, h);
  const std::size_t ow = spec.output_extent(2, w);

  Shape out_shape = planar ? Shape{n, c, oh, ow} : Shape{n, c, ot, oh, ow};
  const std::size_t planes = n * c;
  const std::size_t in_plane = t * h * w;
  const std::size_t out_plane = ot * oh * ow;
  std::vector<double> out(planes * out_plane);
  std::vector<std::size_t> argmax(out.size());
  auto xv = x.data();

  for (std::size_t pl = 0; pl < planes; ++pl) {
    const double* src = xv.data() + pl * in_plane;
    for (std::size_t a = 0; a < ot; ++a) {
      for (std::size_t b = 0; b < oh; ++b) {
        for (std::size_t d = 0; d < ow; ++d) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_at = 0;
          for (std::size_t kt = 0; kt < spec.kernel[0]; ++kt) {
            const long it = long(a * spec.stride[0] + kt) - long(spec.padding[0]);
            if (it < 0 || it >= long(t)) continue;
            for (std::size_t kh = 0; kh < spec.kernel[1]; ++kh) {
              const long ih = long(b * spec.stride[1] + kh) - long(spec.padding[1]);
              if (ih < 0 || ih >= long(h)) continue;
              for (std::size_t kw = 0; kw < spec.kernel[2]; ++kw) {
                const long iw = long(d * spec.stride[2] + kw) - long(spec.padding[2]);
                if (iw < 0 || iw >= long(w)) continue;
                const std::size_t at = (std::size_t(it) * h + std::size_t(ih)) * w + std::size_t(iw);
                if (src[at] > best) {
                  best = src[at];
                  best_at = at;
                }
              }
            }
          }
          const std::size_t o = pl * out_plane + (a * oh + b) * ow + d;
          out[o] = best;
          argmax[o] = pl * in_plane + best_at;
        }
      }
    }
  }
  return make_result(std::move(out_shape), std::move(out), "max_pool", {x},
                     [x, argmax = std::move(argmax)](const detail::TensorImpl& self) {
                       auto& gx = *grad_sink(x);
                       for (std::size_t i = 0; i < argmax.size(); ++i) gx[argmax[i]] += self.grad[i];
                     });
}

}  // namespace bvqa
