#pragma once

#include <cmath>
#include <vector>

#include "sdwnet/tensor.hpp"

namespace sdwnet {

// ---- elementwise -----------------------------------------------------------

template <typename T>
Tensor4<T> add(const Tensor4<T>& a, const Tensor4<T>& b) {
  check_same_shape(a, b, "add");
  Tensor4<T> y(a.n(), a.c(), a.h(), a.w());
  const T* pa = a.data();
  const T* pb = b.data();
  T* py = y.data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(a.numel()); ++i) py[i] = pa[i] + pb[i];
  return y;
}

template <typename T>
Tensor4<T> sub(const Tensor4<T>& a, const Tensor4<T>& b) {
  check_same_shape(a, b, "sub");
  Tensor4<T> y(a.n(), a.c(), a.h(), a.w());
  const T* pa = a.data();
  const T* pb = b.data();
  T* py = y.data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(a.numel()); ++i) py[i] = pa[i] - pb[i];
  return y;
}

template <typename T>
Tensor4<T> mul(const Tensor4<T>& a, const Tensor4<T>& b) {
  check_same_shape(a, b, "mul");
  Tensor4<T> y(a.n(), a.c(), a.h(), a.w());
  const T* pa = a.data();
  const T* pb = b.data();
  T* py = y.data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(a.numel()); ++i) py[i] = pa[i] * pb[i];
  return y;
}

template <typename T>
Tensor4<T> div(const Tensor4<T>& a, const Tensor4<T>& b) {
  check_same_shape(a, b, "div");
  Tensor4<T> y(a.n(), a.c(), a.h(), a.w());
  const T* pa = a.data();
  const T* pb = b.data();
  T* py = y.data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(a.numel()); ++i) py[i] = pa[i] / pb[i];
  return y;
}

template <typename T>
Tensor4<T> affine(const Tensor4<T>& x, T scale, T offset) {
  Tensor4<T> y(x.n(), x.c(), x.h(), x.w());
  const T* px = x.data();
  T* py = y.data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(x.numel()); ++i) py[i] = px[i] * scale + offset;
  return y;
}

// ---- activations ------------------------------------------------------------

template <typename T>
Tensor4<T> relu(const Tensor4<T>& x) {
  Tensor4<T> y(x.n(), x.c(), x.h(), x.w());
  const T* px = x.data();
  T* py = y.data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(x.numel()); ++i) py[i] = px[i] > T(0) ? px[i] : T(0);
  return y;
}

template <typename T>
Tensor4<T> elu(const Tensor4<T>& x, T alpha = T(1)) {
  Tensor4<T> y(x.n(), x.c(), x.h(), x.w());
  const T* px = x.data();
  T* py = y.data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(x.numel()); ++i) {
    py[i] = px[i] > T(0) ? px[i] : alpha * (std::exp(px[i]) - T(1));
  }
  return y;
}

template <typename T>
Tensor4<T> clamp01(const Tensor4<T>& x) {
  Tensor4<T> y(x.n(), x.c(), x.h(), x.w());
  const T* px = x.data();
  T* py = y.data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(x.numel()); ++i) {
    py[i] = px[i] < T(0) ? T(0) : (px[i] > T(1) ? T(1) : px[i]);
  }
  return y;
}

// ---- channel concat / slice -------------------------------------------------

template <typename T>
Tensor4<T> concat_channels(const std::vector<const Tensor4<T>*>& parts) {
  if (parts.empty()) throw ValueError("concat_channels: no inputs");
  const Tensor4<T>& first = *parts[0];
  int c_total = 0;
  for (const Tensor4<T>* p : parts) {
    if (p->n() != first.n() || p->h() != first.h() || p->w() != first.w()) {
      throw ShapeError("concat_channels: spatial/batch mismatch " + first.shape_str() +
                       " vs " + p->shape_str());
    }
    c_total += p->c();
  }
  Tensor4<T> y(first.n(), c_total, first.h(), first.w());
  const size_t plane = static_cast<size_t>(first.h()) * first.w();
  for (int n = 0; n < first.n(); ++n) {
    int c_off = 0;
    for (const Tensor4<T>* p : parts) {
      for (int c = 0; c < p->c(); ++c) {
        std::copy_n(p->plane(n, c), plane, y.plane(n, c_off + c));
      }
      c_off += p->c();
    }
  }
  return y;
}

template <typename T>
Tensor4<T> concat_channels(const std::vector<Tensor4<T>>& parts) {
  std::vector<const Tensor4<T>*> ptrs;
  ptrs.reserve(parts.size());
  for (const auto& p : parts) ptrs.push_back(&p);
  return concat_channels(ptrs);
}

template <typename T>
Tensor4<T> slice_channels(const Tensor4<T>& x, int c_from, int c_to) {
  if (c_from < 0 || c_to > x.c() || c_from >= c_to) {
    throw ShapeError("slice_channels: range [" + std::to_string(c_from) + "," +
                     std::to_string(c_to) + ") outside channel axis of " + x.shape_str());
  }
  Tensor4<T> y(x.n(), c_to - c_from, x.h(), x.w());
  const size_t plane = static_cast<size_t>(x.h()) * x.w();
  for (int n = 0; n < x.n(); ++n) {
    for (int c = c_from; c < c_to; ++c) {
      std::copy_n(x.plane(n, c), plane, y.plane(n, c - c_from));
    }
  }
  return y;
}

// ---- bilinear x2 upsampling --------------------------------------------------

// Half-pixel centers: output pixel i samples input coordinate (i+0.5)/2 - 0.5,
// edge-clamped.
template <typename T>
struct Lerp1D {
  int i0, i1;
  T w0, w1;
};

template <typename T>
inline Lerp1D<T> lerp_coeff(int out_i, int in_size) {
  const T src = (T(out_i) + T(0.5)) / T(2) - T(0.5);
  T f = std::floor(src);
  int i0 = static_cast<int>(f);
  T frac = src - f;
  int i1 = i0 + 1;
  if (i0 < 0) i0 = 0;
  if (i1 < 0) i1 = 0;
  if (i0 > in_size - 1) i0 = in_size - 1;
  if (i1 > in_size - 1) i1 = in_size - 1;
  return {i0, i1, T(1) - frac, frac};
}

template <typename T>
Tensor4<T> bilinear_upsample2x(const Tensor4<T>& x) {
  if (x.h() < 1 || x.w() < 1) throw ShapeError("bilinear_upsample2x: empty input " + x.shape_str());
  const int oh = 2 * x.h(), ow = 2 * x.w();
  Tensor4<T> y(x.n(), x.c(), oh, ow);
  std::vector<Lerp1D<T>> cy(oh), cx(ow);
  for (int i = 0; i < oh; ++i) cy[i] = lerp_coeff<T>(i, x.h());
  for (int i = 0; i < ow; ++i) cx[i] = lerp_coeff<T>(i, x.w());

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const T* in = x.plane(n, c);
      T* out = y.plane(n, c);
      for (int oy = 0; oy < oh; ++oy) {
        const auto& ly = cy[oy];
        const T* r0 = in + static_cast<size_t>(ly.i0) * x.w();
        const T* r1 = in + static_cast<size_t>(ly.i1) * x.w();
        T* orow = out + static_cast<size_t>(oy) * ow;
        for (int ox = 0; ox < ow; ++ox) {
          const auto& lx = cx[ox];
          orow[ox] = ly.w0 * (lx.w0 * r0[lx.i0] + lx.w1 * r0[lx.i1]) +
                     ly.w1 * (lx.w0 * r1[lx.i0] + lx.w1 * r1[lx.i1]);
        }
      }
    }
  }
  return y;
}

// Adjoint of bilinear_upsample2x. One worker owns each (n, c) plane and
// scatters output rows in fixed order.
template <typename T>
Tensor4<T> bilinear_upsample2x_backward(const Tensor4<T>& dy, int in_h, int in_w) {
  Tensor4<T> dx(dy.n(), dy.c(), in_h, in_w);
  const int oh = dy.h(), ow = dy.w();
  std::vector<Lerp1D<T>> cy(oh), cx(ow);
  for (int i = 0; i < oh; ++i) cy[i] = lerp_coeff<T>(i, in_h);
  for (int i = 0; i < ow; ++i) cx[i] = lerp_coeff<T>(i, in_w);

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < dy.n(); ++n) {
    for (int c = 0; c < dy.c(); ++c) {
      const T* g = dy.plane(n, c);
      T* out = dx.plane(n, c);
      for (int oy = 0; oy < oh; ++oy) {
        const auto& ly = cy[oy];
        const T* grow = g + static_cast<size_t>(oy) * ow;
        T* r0 = out + static_cast<size_t>(ly.i0) * in_w;
        T* r1 = out + static_cast<size_t>(ly.i1) * in_w;
        for (int ox = 0; ox < ow; ++ox) {
          const auto& lx = cx[ox];
          const T gv = grow[ox];
          r0[lx.i0] += ly.w0 * lx.w0 * gv;
          r0[lx.i1] += ly.w0 * lx.w1 * gv;
          r1[lx.i0] += ly.w1 * lx.w0 * gv;
          r1[lx.i1] += ly.w1 * lx.w1 * gv;
        }
      }
    }
  }
  return dx;
}

// ---- reflect pad / crop -------------------------------------------------------

// Reflect-pads the bottom/right border by 0 or 1 rows/cols (mirror about the
// edge pixel, PyTorch "reflect"). Used to make spatial sizes even.
template <typename T>
Tensor4<T> pad_reflect_br(const Tensor4<T>& x, int add_bottom, int add_right) {
  if (add_bottom < 0 || add_bottom > 1 || add_right < 0 || add_right > 1) {
    throw ValueError("pad_reflect_br: padding must be 0 or 1");
  }
  if ((add_bottom && x.h() < 2) || (add_right && x.w() < 2)) {
    throw ShapeError("pad_reflect_br: input too small to reflect " + x.shape_str());
  }
  Tensor4<T> y(x.n(), x.c(), x.h() + add_bottom, x.w() + add_right);
  auto src_y = [&](int iy) { return iy < x.h() ? iy : 2 * x.h() - 2 - iy; };
  auto src_x = [&](int ix) { return ix < x.w() ? ix : 2 * x.w() - 2 - ix; };
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const T* in = x.plane(n, c);
      T* out = y.plane(n, c);
      for (int iy = 0; iy < y.h(); ++iy) {
        const T* in_row = in + static_cast<size_t>(src_y(iy)) * x.w();
        T* out_row = out + static_cast<size_t>(iy) * y.w();
        for (int ix = 0; ix < y.w(); ++ix) out_row[ix] = in_row[src_x(ix)];
      }
    }
  }
  return y;
}

// Adjoint of pad_reflect_br: folds padded-border gradients back onto their
// mirror sources.
template <typename T>
Tensor4<T> pad_reflect_br_backward(const Tensor4<T>& dy, int in_h, int in_w) {
  Tensor4<T> dx(dy.n(), dy.c(), in_h, in_w);
  auto src_y = [&](int iy) { return iy < in_h ? iy : 2 * in_h - 2 - iy; };
  auto src_x = [&](int ix) { return ix < in_w ? ix : 2 * in_w - 2 - ix; };
  for (int n = 0; n < dy.n(); ++n) {
    for (int c = 0; c < dy.c(); ++c) {
      const T* g = dy.plane(n, c);
      T* out = dx.plane(n, c);
      for (int iy = 0; iy < dy.h(); ++iy) {
        const T* g_row = g + static_cast<size_t>(iy) * dy.w();
        T* out_row = out + static_cast<size_t>(src_y(iy)) * in_w;
        for (int ix = 0; ix < dy.w(); ++ix) out_row[src_x(ix)] += g_row[ix];
      }
    }
  }
  return dx;
}

// Top-left crop to (h, w).
template <typename T>
Tensor4<T> crop_to(const Tensor4<T>& x, int h, int w) {
  if (h > x.h() || w > x.w() || h < 1 || w < 1) {
    throw ShapeError("crop_to: target (" + std::to_string(h) + "," + std::to_string(w) +
                     ") outside input " + x.shape_str());
  }
  Tensor4<T> y(x.n(), x.c(), h, w);
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const T* in = x.plane(n, c);
      T* out = y.plane(n, c);
      for (int iy = 0; iy < h; ++iy) {
        std::copy_n(in + static_cast<size_t>(iy) * x.w(), w, out + static_cast<size_t>(iy) * w);
      }
    }
  }
  return y;
}

template <typename T>
Tensor4<T> crop_to_backward(const Tensor4<T>& dy, int in_h, int in_w) {
  Tensor4<T> dx(dy.n(), dy.c(), in_h, in_w);
  for (int n = 0; n < dy.n(); ++n) {
    for (int c = 0; c < dy.c(); ++c) {
      const T* g = dy.plane(n, c);
      T* out = dx.plane(n, c);
      for (int iy = 0; iy < dy.h(); ++iy) {
        std::copy_n(g + static_cast<size_t>(iy) * dy.w(), dy.w(),
                    out + static_cast<size_t>(iy) * in_w);
      }
    }
  }
  return dx;
}

// ---- separable blur (fixed kernel, valid padding) -----------------------------

// Depthwise valid-window filtering with a separable kernel outer(k, k):
// rows first, then columns. Output is (h-len+1, w-len+1) per plane.
template <typename T>
Tensor4<T> separable_blur_valid(const Tensor4<T>& x, const std::vector<T>& k) {
  const int len = static_cast<int>(k.size());
  if (len < 1 || x.h() < len || x.w() < len) {
    throw ShapeError("separable_blur_valid: window " + std::to_string(len) +
                     " larger than input " + x.shape_str());
  }
  const int oh = x.h() - len + 1, ow = x.w() - len + 1;
  Tensor4<T> y(x.n(), x.c(), oh, ow);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const T* in = x.plane(n, c);
      T* out = y.plane(n, c);
      std::vector<T> tmp(static_cast<size_t>(x.h()) * ow);
      for (int iy = 0; iy < x.h(); ++iy) {
        const T* row = in + static_cast<size_t>(iy) * x.w();
        T* trow = tmp.data() + static_cast<size_t>(iy) * ow;
        for (int ox = 0; ox < ow; ++ox) {
          T acc = 0;
          for (int t = 0; t < len; ++t) acc += k[t] * row[ox + t];
          trow[ox] = acc;
        }
      }
      for (int oy = 0; oy < oh; ++oy) {
        T* orow = out + static_cast<size_t>(oy) * ow;
        for (int ox = 0; ox < ow; ++ox) {
          T acc = 0;
          for (int t = 0; t < len; ++t) acc += k[t] * tmp[static_cast<size_t>(oy + t) * ow + ox];
          orow[ox] = acc;
        }
      }
    }
  }
  return y;
}

// Adjoint of separable_blur_valid (full-correlation scatter, gather form).
template <typename T>
Tensor4<T> separable_blur_valid_backward(const Tensor4<T>& dy, const std::vector<T>& k,
                                         int in_h, int in_w) {
  const int len = static_cast<int>(k.size());
  const int oh = dy.h(), ow = dy.w();
  Tensor4<T> dx(dy.n(), dy.c(), in_h, in_w);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < dy.n(); ++n) {
    for (int c = 0; c < dy.c(); ++c) {
      const T* g = dy.plane(n, c);
      T* out = dx.plane(n, c);
      // columns adjoint into tmp (in_h x ow), then rows adjoint into dx
      std::vector<T> tmp(static_cast<size_t>(in_h) * ow, T(0));
      for (int iy = 0; iy < in_h; ++iy) {
        T* trow = tmp.data() + static_cast<size_t>(iy) * ow;
        for (int t = 0; t < len; ++t) {
          const int oy = iy - t;
          if (oy < 0 || oy >= oh) continue;
          const T* grow = g + static_cast<size_t>(oy) * ow;
          const T kv = k[t];
          for (int ox = 0; ox < ow; ++ox) trow[ox] += kv * grow[ox];
        }
      }
      for (int iy = 0; iy < in_h; ++iy) {
        const T* trow = tmp.data() + static_cast<size_t>(iy) * ow;
        T* orow = out + static_cast<size_t>(iy) * in_w;
        for (int ix = 0; ix < in_w; ++ix) {
          T acc = 0;
          for (int t = 0; t < len; ++t) {
            const int ox = ix - t;
            if (ox < 0 || ox >= ow) continue;
            acc += k[t] * trow[ox];
          }
          orow[ix] = acc;
        }
      }
    }
  }
  return dx;
}

// Normalized 1-D Gaussian taps (sum = 1), evaluated in double.
template <typename T>
std::vector<T> gaussian_taps(int len, double sigma) {
  std::vector<double> g(len);
  const double mid = (len - 1) / 2.0;
  double sum = 0;
  for (int i = 0; i < len; ++i) {
    g[i] = std::exp(-(i - mid) * (i - mid) / (2.0 * sigma * sigma));
    sum += g[i];
  }
  std::vector<T> out(len);
  for (int i = 0; i < len; ++i) out[i] = static_cast<T>(g[i] / sum);
  return out;
}

// ---- reductions ---------------------------------------------------------------

// Mean over all elements, serial fixed-order accumulation in double.
template <typename T>
T mean_all(const Tensor4<T>& x) {
  if (x.numel() == 0) throw ShapeError("mean_all: empty tensor");
  double acc = 0;
  for (T v : x.values()) acc += static_cast<double>(v);
  return static_cast<T>(acc / static_cast<double>(x.numel()));
}

}  // namespace sdwnet
