#pragma once

#include <span>
#include <string>

#include "sdwnet/tensor.hpp"

namespace sdwnet {

// Geometry of one 2-D cross-correlation. A single dilation/stride/padding
// value applies to both spatial axes.
struct ConvSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int dilation = 1;
  int stride = 1;
  int padding = 0;

  int out_h(int h) const {
    return (h + 2 * padding - dilation * (kernel_h - 1) - 1) / stride + 1;
  }
  int out_w(int w) const {
    return (w + 2 * padding - dilation * (kernel_w - 1) - 1) / stride + 1;
  }

  void validate() const {
    if (in_channels <= 0 || out_channels <= 0 || kernel_h <= 0 || kernel_w <= 0 ||
        dilation <= 0 || stride <= 0 || padding < 0) {
      throw ValueError("ConvSpec: non-positive field (in=" +
                       std::to_string(in_channels) + " out=" + std::to_string(out_channels) +
                       " kh=" + std::to_string(kernel_h) + " kw=" + std::to_string(kernel_w) +
                       " dil=" + std::to_string(dilation) + " stride=" + std::to_string(stride) +
                       " pad=" + std::to_string(padding) + ")");
    }
  }
};

// "Same" spec for a square kernel at stride 1: padding = dilation * (k-1) / 2.
inline ConvSpec same_conv_spec(int in_c, int out_c, int k, int dilation = 1, int stride = 1) {
  ConvSpec s;
  s.in_channels = in_c;
  s.out_channels = out_c;
  s.kernel_h = k;
  s.kernel_w = k;
  s.dilation = dilation;
  s.stride = stride;
  s.padding = dilation * (k - 1) / 2;
  return s;
}

template <typename T>
void check_conv_args(const Tensor4<T>& x, const Tensor4<T>& weight,
                     std::span<const T> bias, const ConvSpec& spec) {
  spec.validate();
  if (x.c() != spec.in_channels) {
    throw ShapeError("conv2d: input channel axis is " + std::to_string(x.c()) +
                     ", spec.in_channels is " + std::to_string(spec.in_channels));
  }
  if (weight.n() != spec.out_channels || weight.c() != spec.in_channels ||
      weight.h() != spec.kernel_h || weight.w() != spec.kernel_w) {
    throw ShapeError("conv2d: weight shape " + weight.shape_str() + " does not match spec (" +
                     std::to_string(spec.out_channels) + "," + std::to_string(spec.in_channels) +
                     "," + std::to_string(spec.kernel_h) + "," + std::to_string(spec.kernel_w) + ")");
  }
  if (!bias.empty() && static_cast<int>(bias.size()) != spec.out_channels) {
    throw ShapeError("conv2d: bias length " + std::to_string(bias.size()) +
                     " does not match out_channels " + std::to_string(spec.out_channels));
  }
  if (spec.out_h(x.h()) <= 0 || spec.out_w(x.w()) <= 0) {
    throw ShapeError("conv2d: spec yields empty output for input " + x.shape_str());
  }
}

// Direct cross-correlation with zero padding and kernel holes of size
// `dilation`. Each output row is accumulated by one worker in a fixed
// (ic, ky, kx) order, so the result does not depend on the thread count.
template <typename T>
Tensor4<T> conv2d(const Tensor4<T>& x, const Tensor4<T>& weight,
                  std::span<const T> bias, const ConvSpec& spec) {
  check_conv_args(x, weight, bias, spec);
  const int oh = spec.out_h(x.h());
  const int ow = spec.out_w(x.w());
  Tensor4<T> y(x.n(), spec.out_channels, oh, ow);

  const int kh = spec.kernel_h, kw = spec.kernel_w;
  const int dil = spec.dilation, stride = spec.stride, pad = spec.padding;
  const int xh = x.h(), xw = x.w();

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int oc = 0; oc < spec.out_channels; ++oc) {
      T* out_plane = y.plane(n, oc);
      const T b = bias.empty() ? T(0) : bias[oc];
      for (int oy = 0; oy < oh; ++oy) {
        T* out_row = out_plane + static_cast<size_t>(oy) * ow;
        for (int ox = 0; ox < ow; ++ox) out_row[ox] = b;
        for (int ic = 0; ic < spec.in_channels; ++ic) {
          const T* in_plane = x.plane(n, ic);
          const T* w_plane = weight.plane(oc, ic);
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride + ky * dil - pad;
            if (iy < 0 || iy >= xh) continue;
            const T* in_row = in_plane + static_cast<size_t>(iy) * xw;
            const T* w_row = w_plane + static_cast<size_t>(ky) * kw;
            for (int kx = 0; kx < kw; ++kx) {
              const T wv = w_row[kx];
              const int off = kx * dil - pad;
              // valid ox range: 0 <= ox*stride + off < xw
              int ox0 = 0;
              if (off < 0) ox0 = (-off + stride - 1) / stride;
              int ox1 = ow;  // exclusive
              if (off + (ow - 1) * stride >= xw) ox1 = (xw - off + stride - 1) / stride;
              if (stride == 1) {
                const T* in_p = in_row + off;
                for (int ox = ox0; ox < ox1; ++ox) out_row[ox] += wv * in_p[ox];
              } else {
                for (int ox = ox0; ox < ox1; ++ox) out_row[ox] += wv * in_row[ox * stride + off];
              }
            }
          }
        }
      }
    }
  }
  return y;
}

// Gradient w.r.t. the conv input, gather form: every input cell sums its
// contributions over (oc, ky, kx) in a fixed order.
template <typename T>
Tensor4<T> conv2d_backward_input(const Tensor4<T>& dy, const Tensor4<T>& weight,
                                 const ConvSpec& spec, int in_h, int in_w) {
  Tensor4<T> dx(dy.n(), spec.in_channels, in_h, in_w);
  const int oh = dy.h(), ow = dy.w();
  const int kh = spec.kernel_h, kw = spec.kernel_w;
  const int dil = spec.dilation, stride = spec.stride, pad = spec.padding;

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < dy.n(); ++n) {
    for (int ic = 0; ic < spec.in_channels; ++ic) {
      T* dx_plane = dx.plane(n, ic);
      for (int iy = 0; iy < in_h; ++iy) {
        for (int ix = 0; ix < in_w; ++ix) {
          T acc = 0;
          for (int oc = 0; oc < spec.out_channels; ++oc) {
            const T* dy_plane = dy.plane(n, oc);
            const T* w_plane = weight.plane(oc, ic);
            for (int ky = 0; ky < kh; ++ky) {
              const int ty = iy + pad - ky * dil;
              if (ty < 0 || ty % stride != 0) continue;
              const int oy = ty / stride;
              if (oy >= oh) continue;
              for (int kx = 0; kx < kw; ++kx) {
                const int tx = ix + pad - kx * dil;
                if (tx < 0 || tx % stride != 0) continue;
                const int ox = tx / stride;
                if (ox >= ow) continue;
                acc += w_plane[static_cast<size_t>(ky) * kw + kx] *
                       dy_plane[static_cast<size_t>(oy) * ow + ox];
              }
            }
          }
          dx_plane[static_cast<size_t>(iy) * in_w + ix] = acc;
        }
      }
    }
  }
  return dx;
}

// Gradient w.r.t. the conv weight. Each (oc, ic) slice is owned by one
// worker; the (n, oy, ox) reduction order is fixed.
template <typename T>
Tensor4<T> conv2d_backward_weight(const Tensor4<T>& x, const Tensor4<T>& dy,
                                  const ConvSpec& spec) {
  Tensor4<T> dw(spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w);
  const int oh = dy.h(), ow = dy.w();
  const int kh = spec.kernel_h, kw = spec.kernel_w;
  const int dil = spec.dilation, stride = spec.stride, pad = spec.padding;
  const int xh = x.h(), xw = x.w();

#pragma omp parallel for collapse(2) schedule(static)
  for (int oc = 0; oc < spec.out_channels; ++oc) {
    for (int ic = 0; ic < spec.in_channels; ++ic) {
      T* dw_plane = dw.plane(oc, ic);
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          T acc = 0;
          for (int n = 0; n < x.n(); ++n) {
            const T* in_plane = x.plane(n, ic);
            const T* dy_plane = dy.plane(n, oc);
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride + ky * dil - pad;
              if (iy < 0 || iy >= xh) continue;
              const T* in_row = in_plane + static_cast<size_t>(iy) * xw;
              const T* dy_row = dy_plane + static_cast<size_t>(oy) * ow;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * stride + kx * dil - pad;
                if (ix < 0 || ix >= xw) continue;
                acc += in_row[ix] * dy_row[ox];
              }
            }
          }
          dw_plane[static_cast<size_t>(ky) * kw + kx] = acc;
        }
      }
    }
  }
  return dw;
}

// Gradient w.r.t. the per-channel bias: sum of dy over (n, h, w).
template <typename T>
std::vector<T> conv2d_backward_bias(const Tensor4<T>& dy) {
  std::vector<T> db(dy.c(), T(0));
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < dy.c(); ++oc) {
    T acc = 0;
    for (int n = 0; n < dy.n(); ++n) {
      const T* p = dy.plane(n, oc);
      const size_t cnt = static_cast<size_t>(dy.h()) * dy.w();
      for (size_t i = 0; i < cnt; ++i) acc += p[i];
    }
    db[oc] = acc;
  }
  return db;
}

// Transposed convolution with kernel 2x2 and stride 2: exact x2 upsampling
// with no overlapping taps. Weight layout is (in, out, 2, 2).
template <typename T>
Tensor4<T> conv2d_transpose2x(const Tensor4<T>& x, const Tensor4<T>& weight,
                              std::span<const T> bias) {
  const int in_c = weight.n(), out_c = weight.c();
  if (x.c() != in_c) {
    throw ShapeError("conv2d_transpose2x: input channel axis is " + std::to_string(x.c()) +
                     ", weight expects " + std::to_string(in_c));
  }
  if (weight.h() != 2 || weight.w() != 2) {
    throw ShapeError("conv2d_transpose2x: weight spatial shape must be 2x2, got " +
                     weight.shape_str());
  }
  Tensor4<T> y(x.n(), out_c, x.h() * 2, x.w() * 2);
  const int ih = x.h(), iw = x.w();

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int oc = 0; oc < out_c; ++oc) {
      T* out_plane = y.plane(n, oc);
      const T b = bias.empty() ? T(0) : bias[oc];
      for (int oy = 0; oy < 2 * ih; ++oy) {
        const int iy = oy / 2, dy_ = oy % 2;
        T* out_row = out_plane + static_cast<size_t>(oy) * 2 * iw;
        for (int ox = 0; ox < 2 * iw; ++ox) {
          const int ix = ox / 2, dx_ = ox % 2;
          T acc = b;
          for (int ic = 0; ic < in_c; ++ic) {
            acc += x.at(n, ic, iy, ix) * weight.at(ic, oc, dy_, dx_);
          }
          out_row[ox] = acc;
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor4<T> conv2d_transpose2x_backward_input(const Tensor4<T>& dy, const Tensor4<T>& weight) {
  const int in_c = weight.n(), out_c = weight.c();
  Tensor4<T> dx(dy.n(), in_c, dy.h() / 2, dy.w() / 2);
  const int ih = dx.h(), iw = dx.w();
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < dy.n(); ++n) {
    for (int ic = 0; ic < in_c; ++ic) {
      T* dx_plane = dx.plane(n, ic);
      for (int iy = 0; iy < ih; ++iy) {
        for (int ix = 0; ix < iw; ++ix) {
          T acc = 0;
          for (int oc = 0; oc < out_c; ++oc) {
            for (int dy_ = 0; dy_ < 2; ++dy_) {
              for (int dx_ = 0; dx_ < 2; ++dx_) {
                acc += dy.at(n, oc, 2 * iy + dy_, 2 * ix + dx_) * weight.at(ic, oc, dy_, dx_);
              }
            }
          }
          dx_plane[static_cast<size_t>(iy) * iw + ix] = acc;
        }
      }
    }
  }
  return dx;
}

template <typename T>
Tensor4<T> conv2d_transpose2x_backward_weight(const Tensor4<T>& x, const Tensor4<T>& dy,
                                              int out_c) {
  Tensor4<T> dw(x.c(), out_c, 2, 2);
#pragma omp parallel for collapse(2) schedule(static)
  for (int ic = 0; ic < x.c(); ++ic) {
    for (int oc = 0; oc < out_c; ++oc) {
      for (int dy_ = 0; dy_ < 2; ++dy_) {
        for (int dx_ = 0; dx_ < 2; ++dx_) {
          T acc = 0;
          for (int n = 0; n < x.n(); ++n) {
            for (int iy = 0; iy < x.h(); ++iy) {
              for (int ix = 0; ix < x.w(); ++ix) {
                acc += x.at(n, ic, iy, ix) * dy.at(n, oc, 2 * iy + dy_, 2 * ix + dx_);
              }
            }
          }
          dw.at(ic, oc, dy_, dx_) = acc;
        }
      }
    }
  }
  return dw;
}

}  // namespace sdwnet
