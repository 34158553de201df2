#pragma once

#include <array>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sdwnet/conv.hpp"
#include "sdwnet/ops.hpp"
#include "sdwnet/tensor.hpp"
#include "sdwnet/wavelet.hpp"

namespace sdwnet {

// A learnable tensor with its accumulated gradient.
template <typename T>
struct Parameter {
  Tensor4<T> value;
  Tensor4<T> grad;
  std::string name;

  Parameter() = default;
  Parameter(Tensor4<T> v, std::string n)
      : value(std::move(v)), grad(value.n(), value.c(), value.h(), value.w()),
        name(std::move(n)) {}

  void reset_grad() { grad.zero(); }
  size_t numel() const { return value.numel(); }
};

template <typename T>
class Tape;

// Handle to a value recorded on a tape.
template <typename T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr && id_ >= 0; }
  Tape<T>* tape() const { return tape_; }
  int id() const { return id_; }
  const Tensor4<T>& value() const { return tape_->value_of(id_); }
  const Tensor4<T>& grad() const { return tape_->grad_of(id_); }

 private:
  Tape<T>* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape: an append-only list of recorded operations in
// topological order (inputs always precede their consumers).
//
// backward() zeroes the tape-local node gradients, seeds the scalar loss
// with 1 and replays the closures in reverse; afterwards each Parameter
// reached by the graph has the new gradient *added* to its .grad, so calling
// backward twice without reset_grad doubles parameter gradients. The tape is
// confined to a single training step.
template <typename T>
class Tape {
 public:
  Var<T> input(Tensor4<T> x) { return make_node(std::move(x), nullptr, {}); }

  // Records a parameter leaf. The parameter's value is captured by copy;
  // after backward() the node gradient is flushed into p.grad.
  Var<T> watch(Parameter<T>& p) { return make_node(p.value, &p, {}); }

  size_t size() const { return nodes_.size(); }

  const Tensor4<T>& value_of(int id) const { return nodes_[id].value; }
  const Tensor4<T>& grad_of(int id) const { return nodes_[id].grad; }

  void backward(const Var<T>& loss) {
    if (loss.tape() != this) throw ValueError("backward: loss lives on another tape");
    if (nodes_[loss.id()].value.numel() != 1) {
      throw ShapeError("backward: loss must be scalar, got " +
                       nodes_[loss.id()].value.shape_str());
    }
    for (auto& n : nodes_) n.grad.zero();
    nodes_[loss.id()].grad.fill(T(1));
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      if (nodes_[i].backward) nodes_[i].backward(*this, nodes_[i].grad);
    }
    for (auto& n : nodes_) {
      if (n.param != nullptr) add_inplace(n.param->grad, n.grad);
    }
  }

  // --- used by op wrappers ---

  using BackwardFn = std::function<void(Tape<T>&, const Tensor4<T>&)>;

  Var<T> make_node(Tensor4<T> value, Parameter<T>* param, BackwardFn backward) {
    Node n;
    n.grad = Tensor4<T>(value.n(), value.c(), value.h(), value.w());
    n.value = std::move(value);
    n.param = param;
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var<T>(this, static_cast<int>(nodes_.size()) - 1);
  }

  void accumulate_grad(int id, const Tensor4<T>& g) { add_inplace(nodes_[id].grad, g); }
  Tensor4<T>& mutable_grad(int id) { return nodes_[id].grad; }

 private:
  struct Node {
    Tensor4<T> value;
    Tensor4<T> grad;
    Parameter<T>* param = nullptr;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;
};

namespace detail {
template <typename T>
Tape<T>& tape_of(const Var<T>& v, const char* what) {
  if (!v.valid()) throw ValueError(std::string(what) + ": invalid Var");
  return *v.tape();
}
template <typename T>
void check_same_tape(const Var<T>& a, const Var<T>& b, const char* what) {
  if (a.tape() != b.tape()) throw ValueError(std::string(what) + ": Vars from different tapes");
}
}  // namespace detail

// ---- recorded operations ----------------------------------------------------

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, const ConvSpec& spec) {
  Tape<T>& t = detail::tape_of(x, "conv2d");
  detail::check_same_tape(x, w, "conv2d");
  detail::check_same_tape(x, b, "conv2d");
  if (b.value().numel() != static_cast<size_t>(spec.out_channels)) {
    throw ShapeError("conv2d: bias numel " + std::to_string(b.value().numel()) +
                     " != out_channels " + std::to_string(spec.out_channels));
  }
  std::span<const T> bias(b.value().data(), b.value().numel());
  Tensor4<T> y = conv2d(x.value(), w.value(), bias, spec);
  const int xi = x.id(), wi = w.id(), bi = b.id();
  const int in_h = x.value().h(), in_w = x.value().w();
  return t.make_node(std::move(y), nullptr,
                     [xi, wi, bi, spec, in_h, in_w](Tape<T>& tp, const Tensor4<T>& g) {
                       tp.accumulate_grad(
                           xi, conv2d_backward_input(g, tp.value_of(wi), spec, in_h, in_w));
                       tp.accumulate_grad(wi, conv2d_backward_weight(tp.value_of(xi), g, spec));
                       std::vector<T> db = conv2d_backward_bias(g);
                       Tensor4<T>& bg = tp.mutable_grad(bi);
                       for (size_t i = 0; i < db.size(); ++i) bg.data()[i] += db[i];
                     });
}

template <typename T>
Var<T> conv2d_transpose2x(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  Tape<T>& t = detail::tape_of(x, "conv2d_transpose2x");
  detail::check_same_tape(x, w, "conv2d_transpose2x");
  detail::check_same_tape(x, b, "conv2d_transpose2x");
  std::span<const T> bias(b.value().data(), b.value().numel());
  Tensor4<T> y = conv2d_transpose2x(x.value(), w.value(), bias);
  const int xi = x.id(), wi = w.id(), bi = b.id();
  const int out_c = w.value().c();
  return t.make_node(std::move(y), nullptr,
                     [xi, wi, bi, out_c](Tape<T>& tp, const Tensor4<T>& g) {
                       tp.accumulate_grad(xi, conv2d_transpose2x_backward_input(g, tp.value_of(wi)));
                       tp.accumulate_grad(
                           wi, conv2d_transpose2x_backward_weight(tp.value_of(xi), g, out_c));
                       std::vector<T> db = conv2d_backward_bias(g);
                       Tensor4<T>& bg = tp.mutable_grad(bi);
                       for (size_t i = 0; i < db.size(); ++i) bg.data()[i] += db[i];
                     });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tape<T>& t = detail::tape_of(x, "relu");
  Tensor4<T> y = relu(x.value());
  const int xi = x.id();
  return t.make_node(std::move(y), nullptr, [xi](Tape<T>& tp, const Tensor4<T>& g) {
    const Tensor4<T>& xv = tp.value_of(xi);
    Tensor4<T>& xg = tp.mutable_grad(xi);
    const T* px = xv.data();
    const T* pg = g.data();
    T* pd = xg.data();
    for (size_t i = 0; i < xv.numel(); ++i) {
      if (px[i] > T(0)) pd[i] += pg[i];
    }
  });
}

template <typename T>
Var<T> elu(const Var<T>& x, T alpha = T(1)) {
  Tape<T>& t = detail::tape_of(x, "elu");
  Tensor4<T> y = elu(x.value(), alpha);
  const int xi = x.id(), yi_self = static_cast<int>(t.size());
  return t.make_node(std::move(y), nullptr,
                     [xi, yi_self, alpha](Tape<T>& tp, const Tensor4<T>& g) {
                       // d/dx = 1 for x > 0, else alpha*exp(x) = y + alpha
                       const Tensor4<T>& xv = tp.value_of(xi);
                       const Tensor4<T>& yv = tp.value_of(yi_self);
                       Tensor4<T>& xg = tp.mutable_grad(xi);
                       const T* px = xv.data();
                       const T* py = yv.data();
                       const T* pg = g.data();
                       T* pd = xg.data();
                       for (size_t i = 0; i < xv.numel(); ++i) {
                         pd[i] += px[i] > T(0) ? pg[i] : pg[i] * (py[i] + alpha);
                       }
                     });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  Tape<T>& t = detail::tape_of(a, "add");
  detail::check_same_tape(a, b, "add");
  Tensor4<T> y = add(a.value(), b.value());
  const int ai = a.id(), bi = b.id();
  return t.make_node(std::move(y), nullptr, [ai, bi](Tape<T>& tp, const Tensor4<T>& g) {
    tp.accumulate_grad(ai, g);
    tp.accumulate_grad(bi, g);
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  Tape<T>& t = detail::tape_of(a, "sub");
  detail::check_same_tape(a, b, "sub");
  Tensor4<T> y = sub(a.value(), b.value());
  const int ai = a.id(), bi = b.id();
  return t.make_node(std::move(y), nullptr, [ai, bi](Tape<T>& tp, const Tensor4<T>& g) {
    tp.accumulate_grad(ai, g);
    Tensor4<T>& bg = tp.mutable_grad(bi);
    const T* pg = g.data();
    T* pd = bg.data();
    for (size_t i = 0; i < g.numel(); ++i) pd[i] -= pg[i];
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  Tape<T>& t = detail::tape_of(a, "mul");
  detail::check_same_tape(a, b, "mul");
  Tensor4<T> y = mul(a.value(), b.value());
  const int ai = a.id(), bi = b.id();
  return t.make_node(std::move(y), nullptr, [ai, bi](Tape<T>& tp, const Tensor4<T>& g) {
    tp.accumulate_grad(ai, mul(g, tp.value_of(bi)));
    tp.accumulate_grad(bi, mul(g, tp.value_of(ai)));
  });
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  Tape<T>& t = detail::tape_of(a, "div");
  detail::check_same_tape(a, b, "div");
  Tensor4<T> y = div(a.value(), b.value());
  const int ai = a.id(), bi = b.id(), yi_self = static_cast<int>(t.size());
  return t.make_node(std::move(y), nullptr,
                     [ai, bi, yi_self](Tape<T>& tp, const Tensor4<T>& g) {
                       const Tensor4<T>& bv = tp.value_of(bi);
                       const Tensor4<T>& yv = tp.value_of(yi_self);
                       Tensor4<T>& ag = tp.mutable_grad(ai);
                       Tensor4<T>& bg = tp.mutable_grad(bi);
                       const T* pg = g.data();
                       const T* pb = bv.data();
                       const T* py = yv.data();
                       T* pag = ag.data();
                       T* pbg = bg.data();
                       for (size_t i = 0; i < g.numel(); ++i) {
                         pag[i] += pg[i] / pb[i];
                         pbg[i] -= pg[i] * py[i] / pb[i];
                       }
                     });
}

template <typename T>
Var<T> affine(const Var<T>& x, T scale, T offset) {
  Tape<T>& t = detail::tape_of(x, "affine");
  Tensor4<T> y = affine(x.value(), scale, offset);
  const int xi = x.id();
  return t.make_node(std::move(y), nullptr, [xi, scale](Tape<T>& tp, const Tensor4<T>& g) {
    Tensor4<T>& xg = tp.mutable_grad(xi);
    const T* pg = g.data();
    T* pd = xg.data();
    for (size_t i = 0; i < g.numel(); ++i) pd[i] += scale * pg[i];
  });
}

template <typename T>
Var<T> clamp01(const Var<T>& x) {
  Tape<T>& t = detail::tape_of(x, "clamp01");
  Tensor4<T> y = clamp01(x.value());
  const int xi = x.id();
  return t.make_node(std::move(y), nullptr, [xi](Tape<T>& tp, const Tensor4<T>& g) {
    // subgradient 1 on [0, 1], 0 outside
    const Tensor4<T>& xv = tp.value_of(xi);
    Tensor4<T>& xg = tp.mutable_grad(xi);
    const T* px = xv.data();
    const T* pg = g.data();
    T* pd = xg.data();
    for (size_t i = 0; i < xv.numel(); ++i) {
      if (px[i] >= T(0) && px[i] <= T(1)) pd[i] += pg[i];
    }
  });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ValueError("concat_channels: no inputs");
  Tape<T>& t = detail::tape_of(parts[0], "concat_channels");
  std::vector<const Tensor4<T>*> vals;
  std::vector<int> ids;
  std::vector<int> widths;
  for (const auto& p : parts) {
    detail::check_same_tape(parts[0], p, "concat_channels");
    vals.push_back(&p.value());
    ids.push_back(p.id());
    widths.push_back(p.value().c());
  }
  Tensor4<T> y = concat_channels(vals);
  return t.make_node(std::move(y), nullptr,
                     [ids, widths](Tape<T>& tp, const Tensor4<T>& g) {
                       int c_off = 0;
                       for (size_t k = 0; k < ids.size(); ++k) {
                         tp.accumulate_grad(ids[k], slice_channels(g, c_off, c_off + widths[k]));
                         c_off += widths[k];
                       }
                     });
}

template <typename T>
Var<T> bilinear_upsample2x(const Var<T>& x) {
  Tape<T>& t = detail::tape_of(x, "bilinear_upsample2x");
  Tensor4<T> y = bilinear_upsample2x(x.value());
  const int xi = x.id();
  const int in_h = x.value().h(), in_w = x.value().w();
  return t.make_node(std::move(y), nullptr,
                     [xi, in_h, in_w](Tape<T>& tp, const Tensor4<T>& g) {
                       tp.accumulate_grad(xi, bilinear_upsample2x_backward(g, in_h, in_w));
                     });
}

template <typename T>
Var<T> pad_reflect_br(const Var<T>& x, int add_bottom, int add_right) {
  Tape<T>& t = detail::tape_of(x, "pad_reflect_br");
  Tensor4<T> y = pad_reflect_br(x.value(), add_bottom, add_right);
  const int xi = x.id();
  const int in_h = x.value().h(), in_w = x.value().w();
  return t.make_node(std::move(y), nullptr,
                     [xi, in_h, in_w](Tape<T>& tp, const Tensor4<T>& g) {
                       tp.accumulate_grad(xi, pad_reflect_br_backward(g, in_h, in_w));
                     });
}

template <typename T>
Var<T> crop_to(const Var<T>& x, int h, int w) {
  Tape<T>& t = detail::tape_of(x, "crop_to");
  Tensor4<T> y = crop_to(x.value(), h, w);
  const int xi = x.id();
  const int in_h = x.value().h(), in_w = x.value().w();
  return t.make_node(std::move(y), nullptr,
                     [xi, in_h, in_w](Tape<T>& tp, const Tensor4<T>& g) {
                       tp.accumulate_grad(xi, crop_to_backward(g, in_h, in_w));
                     });
}

template <typename T>
Var<T> separable_blur_valid(const Var<T>& x, const std::vector<T>& taps) {
  Tape<T>& t = detail::tape_of(x, "separable_blur_valid");
  Tensor4<T> y = separable_blur_valid(x.value(), taps);
  const int xi = x.id();
  const int in_h = x.value().h(), in_w = x.value().w();
  return t.make_node(std::move(y), nullptr,
                     [xi, taps, in_h, in_w](Tape<T>& tp, const Tensor4<T>& g) {
                       tp.accumulate_grad(xi, separable_blur_valid_backward(g, taps, in_h, in_w));
                     });
}

template <typename T>
std::array<Var<T>, 4> dwt_haar(const Var<T>& x) {
  Tape<T>& t = detail::tape_of(x, "dwt_haar");
  SubbandSet<T> s = dwt_haar(x.value());
  const int xi = x.id();
  auto band_backward = [xi](Subband which) {
    return [xi, which](Tape<T>& tp, const Tensor4<T>& g) {
      dwt_adjoint_accumulate(tp.mutable_grad(xi), g, which);
    };
  };
  Var<T> ll = t.make_node(std::move(s.ll), nullptr, band_backward(Subband::kLL));
  Var<T> lh = t.make_node(std::move(s.lh), nullptr, band_backward(Subband::kLH));
  Var<T> hl = t.make_node(std::move(s.hl), nullptr, band_backward(Subband::kHL));
  Var<T> hh = t.make_node(std::move(s.hh), nullptr, band_backward(Subband::kHH));
  return {ll, lh, hl, hh};
}

template <typename T>
Var<T> idwt_haar(const std::array<Var<T>, 4>& bands) {
  Tape<T>& t = detail::tape_of(bands[0], "idwt_haar");
  for (const auto& b : bands) detail::check_same_tape(bands[0], b, "idwt_haar");
  SubbandSet<T> s{bands[0].value(), bands[1].value(), bands[2].value(), bands[3].value()};
  Tensor4<T> y = idwt_haar(s);
  std::array<int, 4> ids{bands[0].id(), bands[1].id(), bands[2].id(), bands[3].id()};
  return t.make_node(std::move(y), nullptr, [ids](Tape<T>& tp, const Tensor4<T>& g) {
    // adjoint of the orthonormal synthesis is the analysis transform
    SubbandSet<T> gs = dwt_haar(g);
    tp.accumulate_grad(ids[0], gs.ll);
    tp.accumulate_grad(ids[1], gs.lh);
    tp.accumulate_grad(ids[2], gs.hl);
    tp.accumulate_grad(ids[3], gs.hh);
  });
}

template <typename T>
Var<T> mean_all(const Var<T>& x) {
  Tape<T>& t = detail::tape_of(x, "mean_all");
  Tensor4<T> y(1, 1, 1, 1);
  y.data()[0] = mean_all(x.value());
  const int xi = x.id();
  const T inv = T(1) / static_cast<T>(x.value().numel());
  return t.make_node(std::move(y), nullptr, [xi, inv](Tape<T>& tp, const Tensor4<T>& g) {
    Tensor4<T>& xg = tp.mutable_grad(xi);
    const T gv = g.data()[0] * inv;
    T* pd = xg.data();
    for (size_t i = 0; i < xg.numel(); ++i) pd[i] += gv;
  });
}

}  // namespace sdwnet
