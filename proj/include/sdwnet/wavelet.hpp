#pragma once

#include "sdwnet/tensor.hpp"

namespace sdwnet {

// The four half-resolution subbands of a single-level 2-D Haar transform,
// orthonormal scaling (overall factor 1/2 per 2x2 block).
template <typename T>
struct SubbandSet {
  Tensor4<T> ll, lh, hl, hh;

  bool consistent() const {
    return ll.same_shape(lh) && ll.same_shape(hl) && ll.same_shape(hh);
  }
};

enum class Subband { kLL = 0, kLH = 1, kHL = 2, kHH = 3 };

// Per-block analysis: block [[a,b],[c,d]] maps to
//   LL=(a+b+c+d)/2, LH=(b-a+d-c)/2, HL=(c+d-a-b)/2, HH=(a-b-c+d)/2.
// LH responds to horizontal variation, HL to vertical.
template <typename T>
SubbandSet<T> dwt_haar(const Tensor4<T>& x) {
  if (x.h() % 2 != 0 || x.w() % 2 != 0) {
    throw ShapeError("dwt_haar: spatial size must be even, got " + x.shape_str());
  }
  const int sh = x.h() / 2, sw = x.w() / 2;
  SubbandSet<T> s{Tensor4<T>(x.n(), x.c(), sh, sw), Tensor4<T>(x.n(), x.c(), sh, sw),
                  Tensor4<T>(x.n(), x.c(), sh, sw), Tensor4<T>(x.n(), x.c(), sh, sw)};
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const T* in = x.plane(n, c);
      T* pll = s.ll.plane(n, c);
      T* plh = s.lh.plane(n, c);
      T* phl = s.hl.plane(n, c);
      T* phh = s.hh.plane(n, c);
      for (int sy = 0; sy < sh; ++sy) {
        const T* r0 = in + static_cast<size_t>(2 * sy) * x.w();
        const T* r1 = r0 + x.w();
        const size_t o = static_cast<size_t>(sy) * sw;
        for (int sx = 0; sx < sw; ++sx) {
          const T a = r0[2 * sx], b = r0[2 * sx + 1];
          const T cc = r1[2 * sx], d = r1[2 * sx + 1];
          pll[o + sx] = (a + b + cc + d) / T(2);
          plh[o + sx] = (b - a + d - cc) / T(2);
          phl[o + sx] = (cc + d - a - b) / T(2);
          phh[o + sx] = (a - b - cc + d) / T(2);
        }
      }
    }
  }
  return s;
}

// Per-block synthesis: a=(LL-LH-HL+HH)/2, b=(LL+LH-HL-HH)/2,
// c=(LL-LH+HL-HH)/2, d=(LL+LH+HL+HH)/2.
template <typename T>
Tensor4<T> idwt_haar(const SubbandSet<T>& s) {
  if (!s.consistent()) {
    throw ShapeError("idwt_haar: subband shapes differ: ll " + s.ll.shape_str() + ", lh " +
                     s.lh.shape_str() + ", hl " + s.hl.shape_str() + ", hh " + s.hh.shape_str());
  }
  const int sh = s.ll.h(), sw = s.ll.w();
  Tensor4<T> x(s.ll.n(), s.ll.c(), 2 * sh, 2 * sw);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const T* pll = s.ll.plane(n, c);
      const T* plh = s.lh.plane(n, c);
      const T* phl = s.hl.plane(n, c);
      const T* phh = s.hh.plane(n, c);
      T* out = x.plane(n, c);
      for (int sy = 0; sy < sh; ++sy) {
        T* r0 = out + static_cast<size_t>(2 * sy) * x.w();
        T* r1 = r0 + x.w();
        const size_t o = static_cast<size_t>(sy) * sw;
        for (int sx = 0; sx < sw; ++sx) {
          const T ll = pll[o + sx], lh = plh[o + sx];
          const T hl = phl[o + sx], hh = phh[o + sx];
          r0[2 * sx] = (ll - lh - hl + hh) / T(2);
          r0[2 * sx + 1] = (ll + lh - hl - hh) / T(2);
          r1[2 * sx] = (ll - lh + hl - hh) / T(2);
          r1[2 * sx + 1] = (ll + lh + hl + hh) / T(2);
        }
      }
    }
  }
  return x;
}

// Accumulates the adjoint of one analysis subband into dx. The transform is
// orthonormal, so the adjoint of DWT is IDWT restricted to a single subband.
template <typename T>
void dwt_adjoint_accumulate(Tensor4<T>& dx, const Tensor4<T>& g, Subband which) {
  const int sh = g.h(), sw = g.w();
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < dx.n(); ++n) {
    for (int c = 0; c < dx.c(); ++c) {
      const T* pg = g.plane(n, c);
      T* out = dx.plane(n, c);
      for (int sy = 0; sy < sh; ++sy) {
        T* r0 = out + static_cast<size_t>(2 * sy) * dx.w();
        T* r1 = r0 + dx.w();
        const size_t o = static_cast<size_t>(sy) * sw;
        for (int sx = 0; sx < sw; ++sx) {
          const T v = pg[o + sx] / T(2);
          switch (which) {
            case Subband::kLL:
              r0[2 * sx] += v; r0[2 * sx + 1] += v; r1[2 * sx] += v; r1[2 * sx + 1] += v;
              break;
            case Subband::kLH:
              r0[2 * sx] -= v; r0[2 * sx + 1] += v; r1[2 * sx] -= v; r1[2 * sx + 1] += v;
              break;
            case Subband::kHL:
              r0[2 * sx] -= v; r0[2 * sx + 1] -= v; r1[2 * sx] += v; r1[2 * sx + 1] += v;
              break;
            case Subband::kHH:
              r0[2 * sx] += v; r0[2 * sx + 1] -= v; r1[2 * sx] -= v; r1[2 * sx + 1] += v;
              break;
          }
        }
      }
    }
  }
}

}  // namespace sdwnet
