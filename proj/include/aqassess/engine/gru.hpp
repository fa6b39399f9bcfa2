// Copyright 2026  aqassess authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "aqassess/engine/blas.hpp"
#include "aqassess/engine/layers.hpp"
#include "aqassess/engine/tensor.hpp"

namespace aqassess::engine {

/// Right-padded sequence batch: values [N x T x D], lengths[n] in 1..T.
template <typename T>
struct SequenceBatch {
  Tensor<T> values;
  std::vector<std::size_t> lengths;

  std::size_t batch() const { return values.dim(0); }
  std::size_t steps() const { return values.dim(1); }
  std::size_t width() const { return values.dim(2); }
};

/// One unidirectional GRU layer. Gate blocks are stacked [z; r; n]:
///   z = sigmoid(Wz x + bz + Uz h + cz)
///   r = sigmoid(Wr x + br + Ur h + cr)
///   n = tanh(Wn x + bn + Un (r * h) + cn)
///   h' = (1 - z) * h + z * n
/// Steps at or past a sequence's length leave its state unchanged, so padding
/// never reaches h_T or the gradients.
template <typename T>
class GruLayer {
 public:
  GruLayer() = default;
  GruLayer(std::size_t input, std::size_t hidden)
      : din_(input),
        hid_(hidden),
        w_ih_("w_ih", {3 * hidden, input}),
        b_ih_("b_ih", {3 * hidden}),
        w_hh_("w_hh", {3 * hidden, hidden}),
        b_hh_("b_hh", {3 * hidden}) {}

  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hid_));
    uniform_init(w_ih_.value, bound, rng);
    uniform_init(b_ih_.value, bound, rng);
    uniform_init(w_hh_.value, bound, rng);
    uniform_init(b_hh_.value, bound, rng);
  }

  std::size_t input_width() const { return din_; }
  std::size_t hidden() const { return hid_; }
  Param<T>& w_ih() { return w_ih_; }

  /// Returns all hidden states [N x T x H].
  Tensor<T> forward(const Tensor<T>& x, const std::vector<std::size_t>& lengths) {
    if (x.rank() != 3 || x.dim(2) != din_)
      throw std::invalid_argument("gru: expected N x T x " + std::to_string(din_) + " input, got " +
                                  shape_str(x.shape()));
    const std::size_t n = x.dim(0), steps = x.dim(1), g3 = 3 * hid_, h = hid_;
    if (steps == 0) throw std::invalid_argument("gru: sequence needs at least one step");
    if (lengths.size() != n) throw std::invalid_argument("gru: one length per sequence required");
    input_ = x;
    lengths_ = lengths;

    gx_ = Tensor<T>({n, steps, g3});
    for (std::size_t r = 0; r < n * steps; ++r)
      std::copy(b_ih_.value.data(), b_ih_.value.data() + g3, gx_.data() + r * g3);
    gemm(false, true, n * steps, g3, din_, T(1), x.data(), din_, w_ih_.value.data(), din_, T(1),
         gx_.data(), g3);

    states_ = Tensor<T>({n, steps, h});
    z_ = Tensor<T>({n, steps, h});
    r_ = Tensor<T>({n, steps, h});
    cand_ = Tensor<T>({n, steps, h});
    rh_ = Tensor<T>({n, steps, h});
    std::vector<T> hprev(n * h, T(0)), gh(n * 2 * h), rh(n * h), gn(n * h);

    for (std::size_t t = 0; t < steps; ++t) {
      gemm(false, true, n, 2 * h, h, T(1), hprev.data(), h, w_hh_.value.data(), h, T(0), gh.data(),
           2 * h);
      for (std::size_t s = 0; s < n; ++s) {
        const T* gxs = gx_.data() + (s * steps + t) * g3;
        const std::size_t o = (s * steps + t) * h;
        for (std::size_t j = 0; j < h; ++j) {
          const T z = sigmoid(gxs[j] + gh[s * 2 * h + j] + b_hh_.value[j]);
          const T r = sigmoid(gxs[h + j] + gh[s * 2 * h + h + j] + b_hh_.value[h + j]);
          z_[o + j] = z;
          r_[o + j] = r;
          rh[s * h + j] = r * hprev[s * h + j];
          rh_[o + j] = rh[s * h + j];
        }
      }
      gemm(false, true, n, h, h, T(1), rh.data(), h, w_hh_.value.data() + 2 * h * h, h, T(0),
           gn.data(), h);
      for (std::size_t s = 0; s < n; ++s) {
        const T* gxs = gx_.data() + (s * steps + t) * g3;
        const std::size_t o = (s * steps + t) * h;
        const bool active = t < lengths_[s];
        for (std::size_t j = 0; j < h; ++j) {
          const T c = std::tanh(gxs[2 * h + j] + gn[s * h + j] + b_hh_.value[2 * h + j]);
          cand_[o + j] = c;
          const T hp = hprev[s * h + j];
          const T hn = active ? (T(1) - z_[o + j]) * hp + z_[o + j] * c : hp;
          states_[o + j] = hn;
          hprev[s * h + j] = hn;
        }
      }
    }
    return states_;
  }

  /// dstates [N x T x H] -> dinput [N x T x D]; accumulates parameter grads.
  Tensor<T> backward(const Tensor<T>& dstates) {
    const std::size_t n = input_.dim(0), steps = input_.dim(1), g3 = 3 * hid_, h = hid_;
    if (dstates.shape() != states_.shape()) throw std::invalid_argument("gru: bad gradient shape");
    Tensor<T> dgx({n, steps, g3});
    std::vector<T> dh(n * h), dnext(n * h, T(0)), da_zr(n * 2 * h), da_n(n * h), drh(n * h),
        hprev(n * h);
    for (std::size_t tt = steps; tt-- > 0;) {
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t o = (s * steps + tt) * h;
        for (std::size_t j = 0; j < h; ++j) {
          dh[s * h + j] = dstates[o + j] + dnext[s * h + j];
          hprev[s * h + j] = tt > 0 ? states_[o - h + j] : T(0);
        }
      }
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t o = (s * steps + tt) * h;
        const bool active = tt < lengths_[s];
        T* dgs = dgx.data() + (s * steps + tt) * g3;
        for (std::size_t j = 0; j < h; ++j) {
          if (!active) {
            da_zr[s * 2 * h + j] = da_zr[s * 2 * h + h + j] = da_n[s * h + j] = T(0);
            dnext[s * h + j] = dh[s * h + j];
            continue;
          }
          const T z = z_[o + j], c = cand_[o + j], g = dh[s * h + j];
          const T hp = hprev[s * h + j];
          const T dz = g * (c - hp);
          const T an = g * z * (T(1) - c * c);
          da_n[s * h + j] = an;
          da_zr[s * 2 * h + j] = dz * z * (T(1) - z);
          dgs[j] = da_zr[s * 2 * h + j];
          dgs[2 * h + j] = an;
          dnext[s * h + j] = g * (T(1) - z);
        }
      }
      // d(r * h) = da_n Un ; reset-gate and h_prev contributions follow.
      gemm(false, false, n, h, h, T(1), da_n.data(), h, w_hh_.value.data() + 2 * h * h, h, T(0),
           drh.data(), h);
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t o = (s * steps + tt) * h;
        if (tt >= lengths_[s]) continue;
        T* dgs = dgx.data() + (s * steps + tt) * g3;
        for (std::size_t j = 0; j < h; ++j) {
          const T r = r_[o + j];
          const T dr = drh[s * h + j] * hprev[s * h + j];
          da_zr[s * 2 * h + h + j] = dr * r * (T(1) - r);
          dgs[h + j] = da_zr[s * 2 * h + h + j];
          dnext[s * h + j] += drh[s * h + j] * r;
        }
      }
      gemm(false, false, n, h, 2 * h, T(1), da_zr.data(), 2 * h, w_hh_.value.data(), h, T(1),
           dnext.data(), h);
      // Hidden-side parameter gradients for this step.
      gemm(true, false, 2 * h, h, n, T(1), da_zr.data(), 2 * h, hprev.data(), h, T(1),
           w_hh_.grad.data(), h);
      std::vector<T> rh_t(n * h);
      for (std::size_t s = 0; s < n; ++s)
        std::copy(rh_.data() + (s * steps + tt) * h, rh_.data() + (s * steps + tt + 1) * h,
                  rh_t.data() + s * h);
      gemm(true, false, h, h, n, T(1), da_n.data(), h, rh_t.data(), h, T(1),
           w_hh_.grad.data() + 2 * h * h, h);
      for (std::size_t s = 0; s < n; ++s)
        for (std::size_t j = 0; j < h; ++j) {
          b_hh_.grad[j] += da_zr[s * 2 * h + j];
          b_hh_.grad[h + j] += da_zr[s * 2 * h + h + j];
          b_hh_.grad[2 * h + j] += da_n[s * h + j];
        }
    }
    gemm(true, false, g3, din_, n * steps, T(1), dgx.data(), g3, input_.data(), din_, T(1),
         w_ih_.grad.data(), din_);
    for (std::size_t r = 0; r < n * steps; ++r)
      for (std::size_t j = 0; j < g3; ++j) b_ih_.grad[j] += dgx[r * g3 + j];
    Tensor<T> dx({n, steps, din_});
    gemm(false, false, n * steps, din_, g3, T(1), dgx.data(), g3, w_ih_.value.data(), din_, T(0),
         dx.data(), din_);
    return dx;
  }

  std::vector<ParamRef<T>> params() {
    return {ref(w_ih_), ref(b_ih_), ref(w_hh_), ref(b_hh_)};
  }

 private:
  std::size_t din_ = 0, hid_ = 0;
  Param<T> w_ih_, b_ih_, w_hh_, b_hh_;
  Tensor<T> input_, gx_, states_, z_, r_, cand_, rh_;
  std::vector<std::size_t> lengths_;
};

/// Stack of GRU layers; layer l+1 consumes the states of layer l.
template <typename T>
class GruStack {
 public:
  GruStack() = default;
  GruStack(std::size_t input, std::size_t hidden, std::size_t layers) {
    for (std::size_t l = 0; l < layers; ++l) layers_.emplace_back(l == 0 ? input : hidden, hidden);
  }

  void init(Rng& rng) {
    for (auto& l : layers_) l.init(rng);
  }

  std::size_t num_layers() const { return layers_.size(); }
  GruLayer<T>& layer(std::size_t i) { return layers_.at(i); }
  std::size_t input_width() const { return layers_.front().input_width(); }
  std::size_t hidden() const { return layers_.front().hidden(); }

  /// Hidden states of every layer, bottom first.
  std::vector<Tensor<T>> forward(const SequenceBatch<T>& batch) {
    std::vector<Tensor<T>> out;
    const Tensor<T>* x = &batch.values;
    for (auto& l : layers_) {
      out.push_back(l.forward(*x, batch.lengths));
      x = &out.back();
    }
    return out;
  }

  /// Gradient w.r.t. the top layer's states; returns gradient w.r.t. input.
  Tensor<T> backward(const Tensor<T>& dtop) {
    Tensor<T> g = dtop;
    for (std::size_t l = layers_.size(); l-- > 0;) g = layers_[l].backward(g);
    return g;
  }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> out;
    for (std::size_t l = 0; l < layers_.size(); ++l)
      append(out, prefixed(layers_[l].params(), "gru" + std::to_string(l + 1) + "."));
    return out;
  }

 private:
  std::vector<GruLayer<T>> layers_;
};

}  // namespace aqassess::engine
