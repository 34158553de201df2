#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "sdwnet/errors.hpp"

namespace sdwnet {

// Dense 4-D array in batch x channel x height x width order, row-major with
// w fastest. Carrier for images, feature maps and gradients.
template <typename T>
class Tensor4 {
  static_assert(std::is_floating_point_v<T>, "Tensor4 holds real scalars");

 public:
  Tensor4() = default;

  Tensor4(int n, int c, int h, int w) : n_(n), c_(c), h_(h), w_(w) {
    if (n < 0 || c < 0 || h < 0 || w < 0) {
      throw ValueError("Tensor4: negative dimension (" + shape_str() + ")");
    }
    data_.assign(static_cast<size_t>(n) * c * h * w, T(0));
  }

  static Tensor4 full(int n, int c, int h, int w, T v) {
    Tensor4 t(n, c, h, w);
    t.fill(v);
    return t;
  }

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  std::array<int, 4> shape() const { return {n_, c_, h_, w_}; }
  size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  size_t index(int n, int c, int h, int w) const {
    return ((static_cast<size_t>(n) * c_ + c) * h_ + h) * w_ + w;
  }
  T& at(int n, int c, int h, int w) { return data_[index(n, c, h, w)]; }
  const T& at(int n, int c, int h, int w) const { return data_[index(n, c, h, w)]; }

  // Pointer to the start of one (n, c) plane.
  T* plane(int n, int c) { return data_.data() + index(n, c, 0, 0); }
  const T* plane(int n, int c) const { return data_.data() + index(n, c, 0, 0); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(T(0)); }

  bool same_shape(const Tensor4& o) const {
    return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  std::string shape_str() const {
    return "(" + std::to_string(n_) + "," + std::to_string(c_) + "," +
           std::to_string(h_) + "," + std::to_string(w_) + ")";
  }

  bool operator==(const Tensor4& o) const {
    return same_shape(o) && data_ == o.data_;
  }

 private:
  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<T> data_;
};

using Tensor4f = Tensor4<float>;
using Tensor4d = Tensor4<double>;

template <typename T>
void check_same_shape(const Tensor4<T>& a, const Tensor4<T>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}

// In-place a += b.
template <typename T>
void add_inplace(Tensor4<T>& a, const Tensor4<T>& b) {
  check_same_shape(a, b, "add_inplace");
  T* pa = a.data();
  const T* pb = b.data();
  for (size_t i = 0; i < a.numel(); ++i) pa[i] += pb[i];
}

template <typename T>
void scale_inplace(Tensor4<T>& a, T s) {
  for (T& v : a.values()) v *= s;
}

template <typename T>
T max_abs_diff(const Tensor4<T>& a, const Tensor4<T>& b) {
  check_same_shape(a, b, "max_abs_diff");
  T m = 0;
  const T* pa = a.data();
  const T* pb = b.data();
  for (size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(pa[i] - pb[i]));
  return m;
}

template <typename T>
void fill_normal(Tensor4<T>& t, std::mt19937& rng, T stddev) {
  std::normal_distribution<T> dist(T(0), stddev);
  for (T& v : t.values()) v = dist(rng);
}

template <typename T>
void fill_uniform(Tensor4<T>& t, std::mt19937& rng, T lo, T hi) {
  std::uniform_real_distribution<T> dist(lo, hi);
  for (T& v : t.values()) v = dist(rng);
}

template <typename From, typename To>
Tensor4<To> cast_tensor(const Tensor4<From>& src) {
  Tensor4<To> dst(src.n(), src.c(), src.h(), src.w());
  const From* ps = src.data();
  To* pd = dst.data();
  for (size_t i = 0; i < src.numel(); ++i) pd[i] = static_cast<To>(ps[i]);
  return dst;
}

}  // namespace sdwnet
