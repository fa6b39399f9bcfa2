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
#include "aqassess/engine/tensor.hpp"
#include "aqassess/rng.hpp"

namespace aqassess::engine {

enum class Mode { train, eval };

template <typename T>
void he_uniform(Tensor<T>& w, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : w.vec()) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
void uniform_init(Tensor<T>& w, double bound, Rng& rng) {
  for (auto& v : w.vec()) v = static_cast<T>(rng.uniform(-bound, bound));
}

/// 3x3 cross-correlation, pad 1, stride 1, with per-output-channel bias.
///   y[o,i,j] = b[o] + sum_{c,u,v} w[o,c,u,v] * x[c, i+u-1, j+v-1]
template <typename T>
class Conv2d {
 public:
  static constexpr std::size_t kSize = 3;

  Conv2d() = default;
  Conv2d(std::size_t in_channels, std::size_t out_channels)
      : cin_(in_channels),
        cout_(out_channels),
        weight_("weight", {out_channels, in_channels, kSize, kSize}),
        bias_("bias", {out_channels}) {}

  void init(Rng& rng) {
    he_uniform(weight_.value, cin_ * kSize * kSize, rng);
    bias_.value.fill(T(0));
  }

  std::size_t in_channels() const { return cin_; }
  std::size_t out_channels() const { return cout_; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

  Tensor<T> forward(const Tensor<T>& x) {
    check_input(x);
    input_ = x;
    const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3), hw = h * w;
    Tensor<T> y({n, cout_, h, w});
    std::vector<T> col(cin_ * kSize * kSize * hw);
    for (std::size_t s = 0; s < n; ++s) {
      im2col(x.data() + s * cin_ * hw, h, w, col.data());
      T* ys = y.data() + s * cout_ * hw;
      for (std::size_t o = 0; o < cout_; ++o) std::fill(ys + o * hw, ys + (o + 1) * hw, bias_.value[o]);
      gemm(false, false, cout_, hw, cin_ * 9, T(1), weight_.value.data(), cin_ * 9, col.data(), hw,
           T(1), ys, hw);
    }
    return y;
  }

  /// Accumulates weight/bias gradients and returns d(loss)/d(input).
  Tensor<T> backward(const Tensor<T>& dy) {
    const Tensor<T>& x = input_;
    const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3), hw = h * w;
    if (dy.shape() != Shape{n, cout_, h, w}) throw std::invalid_argument("conv2d: bad gradient shape");
    Tensor<T> dx(x.shape());
    std::vector<T> col(cin_ * 9 * hw), dcol(cin_ * 9 * hw);
    for (std::size_t s = 0; s < n; ++s) {
      const T* dys = dy.data() + s * cout_ * hw;
      im2col(x.data() + s * cin_ * hw, h, w, col.data());
      gemm(false, true, cout_, cin_ * 9, hw, T(1), dys, hw, col.data(), hw, T(1),
           weight_.grad.data(), cin_ * 9);
      for (std::size_t o = 0; o < cout_; ++o) {
        T acc = 0;
        for (std::size_t i = 0; i < hw; ++i) acc += dys[o * hw + i];
        bias_.grad[o] += acc;
      }
      gemm(true, false, cin_ * 9, hw, cout_, T(1), weight_.value.data(), cin_ * 9, dys, hw, T(0),
           dcol.data(), hw);
      col2im(dcol.data(), h, w, dx.data() + s * cin_ * hw);
    }
    return dx;
  }

  std::vector<ParamRef<T>> params() { return {ref(weight_), ref(bias_)}; }

 private:
  void check_input(const Tensor<T>& x) const {
    if (x.rank() != 4 || x.dim(1) != cin_)
      throw std::invalid_argument("conv2d: expected N x " + std::to_string(cin_) +
                                  " x H x W input, got " + shape_str(x.shape()));
  }

  // col[(c*9 + u*3 + v), i*w + j] = x[c, i+u-1, j+v-1] (zero outside).
  void im2col(const T* x, std::size_t h, std::size_t w, T* col) const {
    const std::size_t hw = h * w;
    for (std::size_t c = 0; c < cin_; ++c)
      for (std::size_t u = 0; u < 3; ++u)
        for (std::size_t v = 0; v < 3; ++v) {
          T* row = col + ((c * 3 + u) * 3 + v) * hw;
          const T* xc = x + c * hw;
          for (std::size_t i = 0; i < h; ++i) {
            const long si = static_cast<long>(i) + static_cast<long>(u) - 1;
            T* dst = row + i * w;
            if (si < 0 || si >= static_cast<long>(h)) {
              std::fill(dst, dst + w, T(0));
              continue;
            }
            const T* src = xc + static_cast<std::size_t>(si) * w;
            if (v == 0) {
              dst[0] = T(0);
              std::copy(src, src + w - 1, dst + 1);
            } else if (v == 1) {
              std::copy(src, src + w, dst);
            } else {
              std::copy(src + 1, src + w, dst);
              dst[w - 1] = T(0);
            }
          }
        }
  }

  void col2im(const T* col, std::size_t h, std::size_t w, T* x) const {
    const std::size_t hw = h * w;
    for (std::size_t c = 0; c < cin_; ++c)
      for (std::size_t u = 0; u < 3; ++u)
        for (std::size_t v = 0; v < 3; ++v) {
          const T* row = col + ((c * 3 + u) * 3 + v) * hw;
          T* xc = x + c * hw;
          for (std::size_t i = 0; i < h; ++i) {
            const long si = static_cast<long>(i) + static_cast<long>(u) - 1;
            if (si < 0 || si >= static_cast<long>(h)) continue;
            const T* src = row + i * w;
            T* dst = xc + static_cast<std::size_t>(si) * w;
            if (v == 0) {
              for (std::size_t j = 1; j < w; ++j) dst[j - 1] += src[j];
            } else if (v == 1) {
              for (std::size_t j = 0; j < w; ++j) dst[j] += src[j];
            } else {
              for (std::size_t j = 0; j + 1 < w; ++j) dst[j + 1] += src[j];
            }
          }
        }
  }

  std::size_t cin_ = 0, cout_ = 0;
  Param<T> weight_, bias_;
  Tensor<T> input_;
};

/// Max pooling, window 3, stride 2, no padding. Ties go to the first
/// element in row-major window order.
template <typename T>
class MaxPool2d {
 public:
  static constexpr std::size_t kWindow = 3;
  static constexpr std::size_t kStride = 2;

  static std::size_t out_size(std::size_t in) { return (in - kWindow) / kStride + 1; }

  Tensor<T> forward(const Tensor<T>& x) {
    if (x.rank() != 4 || x.dim(2) < kWindow || x.dim(3) < kWindow)
      throw std::invalid_argument("maxpool: input " + shape_str(x.shape()) +
                                  " smaller than the 3x3 window");
    in_shape_ = x.shape();
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = out_size(h), ow = out_size(w);
    Tensor<T> y({n, c, oh, ow});
    argmax_.assign(y.size(), 0);
    std::size_t k = 0;
    for (std::size_t p = 0; p < n * c; ++p) {
      const T* xp = x.data() + p * h * w;
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j, ++k) {
          std::size_t best = (i * kStride) * w + j * kStride;
          for (std::size_t u = 0; u < kWindow; ++u)
            for (std::size_t v = 0; v < kWindow; ++v) {
              const std::size_t idx = (i * kStride + u) * w + j * kStride + v;
              if (xp[idx] > xp[best] || (std::isnan(xp[idx]) && !std::isnan(xp[best]))) best = idx;
            }
          y[k] = xp[best];
          argmax_[k] = p * h * w + best;
        }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) const {
    if (dy.size() != argmax_.size()) throw std::invalid_argument("maxpool: bad gradient shape");
    Tensor<T> dx(in_shape_);
    for (std::size_t k = 0; k < dy.size(); ++k) dx[argmax_[k]] += dy[k];
    return dx;
  }

 private:
  Shape in_shape_;
  std::vector<std::size_t> argmax_;
};

/// Per-channel batch normalization over N x H x W.
template <typename T>
class BatchNorm2d {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

  BatchNorm2d() = default;
  explicit BatchNorm2d(std::size_t channels)
      : c_(channels),
        gamma_("gamma", {channels}),
        beta_("beta", {channels}),
        running_mean_({channels}, T(0)),
        running_var_({channels}, T(1)) {
    gamma_.value.fill(T(1));
  }

  void set_mode(Mode m) { mode_ = m; }
  Mode mode() const { return mode_; }
  Param<T>& gamma() { return gamma_; }
  Param<T>& beta() { return beta_; }
  Tensor<T>& running_mean() { return running_mean_; }
  Tensor<T>& running_var() { return running_var_; }

  Tensor<T> forward(const Tensor<T>& x) {
    if (x.rank() != 4 || x.dim(1) != c_)
      throw std::invalid_argument("batchnorm: expected N x " + std::to_string(c_) +
                                  " x H x W, got " + shape_str(x.shape()));
    const std::size_t n = x.dim(0), hw = x.dim(2) * x.dim(3);
    const std::size_t count = n * hw;
    Tensor<T> y(x.shape());
    xhat_ = Tensor<T>(x.shape());
    inv_std_.assign(c_, T(0));
    if (mode_ == Mode::train && n < 2)
      throw std::invalid_argument("batchnorm: training mode needs a batch of at least 2");
    for (std::size_t ch = 0; ch < c_; ++ch) {
      double mean, var;
      if (mode_ == Mode::train) {
        double sum = 0;
        for (std::size_t s = 0; s < n; ++s) sum += sum_row(x.data() + (s * c_ + ch) * hw, hw, 0.0);
        mean = sum / static_cast<double>(count);
        double sq = 0;
        for (std::size_t s = 0; s < n; ++s) sq += sum_sq_row(x.data() + (s * c_ + ch) * hw, hw, mean);
        var = sq / static_cast<double>(count);
        const double unbiased = count > 1 ? sq / static_cast<double>(count - 1) : var;
        running_mean_[ch] = static_cast<T>((1 - kMomentum) * running_mean_[ch] + kMomentum * mean);
        running_var_[ch] = static_cast<T>((1 - kMomentum) * running_var_[ch] + kMomentum * unbiased);
      } else {
        mean = running_mean_[ch];
        var = running_var_[ch];
      }
      const T inv = static_cast<T>(1.0 / std::sqrt(var + kEps));
      const T m = static_cast<T>(mean);
      inv_std_[ch] = inv;
      const T g = gamma_.value[ch], b = beta_.value[ch];
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t off = (s * c_ + ch) * hw;
        const T* xp = x.data() + off;
        T* hp = xhat_.data() + off;
        T* yp = y.data() + off;
        for (std::size_t i = 0; i < hw; ++i) {
          const T xh = (xp[i] - m) * inv;
          hp[i] = xh;
          yp[i] = g * xh + b;
        }
      }
    }
    trained_forward_ = mode_ == Mode::train;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (dy.shape() != xhat_.shape()) throw std::invalid_argument("batchnorm: bad gradient shape");
    const std::size_t n = dy.dim(0), hw = dy.dim(2) * dy.dim(3);
    const double count = static_cast<double>(n * hw);
    Tensor<T> dx(dy.shape());
    for (std::size_t ch = 0; ch < c_; ++ch) {
      double sum_dy = 0, sum_dy_xh = 0;
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t off = (s * c_ + ch) * hw;
        sum_dy += sum_row(dy.data() + off, hw, 0.0);
        sum_dy_xh += sum_prod_row(dy.data() + off, xhat_.data() + off, hw);
      }
      gamma_.grad[ch] += static_cast<T>(sum_dy_xh);
      beta_.grad[ch] += static_cast<T>(sum_dy);
      const T g = gamma_.value[ch], inv = inv_std_[ch];
      // Full batch-statistics gradient in train mode, a plain affine map otherwise.
      const T a = trained_forward_ ? static_cast<T>(g * inv) : g * inv;
      const T mean_dy = trained_forward_ ? static_cast<T>(sum_dy / count) : T(0);
      const T mean_dy_xh = trained_forward_ ? static_cast<T>(sum_dy_xh / count) : T(0);
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t off = (s * c_ + ch) * hw;
        const T* d = dy.data() + off;
        const T* h = xhat_.data() + off;
        T* o = dx.data() + off;
        for (std::size_t i = 0; i < hw; ++i) o[i] = a * (d[i] - mean_dy - h[i] * mean_dy_xh);
      }
    }
    return dx;
  }

  std::vector<ParamRef<T>> params() { return {ref(gamma_), ref(beta_)}; }
  std::vector<ParamRef<T>> buffers() {
    return {{"running_mean", &running_mean_, nullptr}, {"running_var", &running_var_, nullptr}};
  }

 private:
  // Eight interleaved double accumulators: a fixed summation order that
  // still vectorizes.
  static double sum_row(const T* p, std::size_t len, double shift) {
    double acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8)
      for (std::size_t k = 0; k < 8; ++k) acc[k] += static_cast<double>(p[i + k]) - shift;
    for (; i < len; ++i) acc[0] += static_cast<double>(p[i]) - shift;
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  }
  static double sum_sq_row(const T* p, std::size_t len, double mean) {
    double acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8)
      for (std::size_t k = 0; k < 8; ++k) {
        const double d = static_cast<double>(p[i + k]) - mean;
        acc[k] += d * d;
      }
    for (; i < len; ++i) {
      const double d = static_cast<double>(p[i]) - mean;
      acc[0] += d * d;
    }
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  }
  static double sum_prod_row(const T* a, const T* b, std::size_t len) {
    double acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8)
      for (std::size_t k = 0; k < 8; ++k) acc[k] += static_cast<double>(a[i + k]) * b[i + k];
    for (; i < len; ++i) acc[0] += static_cast<double>(a[i]) * b[i];
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  }

  std::size_t c_ = 0;
  Param<T> gamma_, beta_;
  Tensor<T> running_mean_, running_var_;
  Mode mode_ = Mode::train;
  bool trained_forward_ = true;
  Tensor<T> xhat_;
  std::vector<T> inv_std_;
};

template <typename T>
class Relu {
 public:
  Tensor<T> forward(Tensor<T> x) {
    // NaN passes through so non-finite inputs surface downstream.
    for (auto& v : x.vec()) v = v < T(0) ? T(0) : v;
    out_ = x;
    return x;
  }
  Tensor<T> backward(Tensor<T> dy) const {
    if (dy.size() != out_.size()) throw std::invalid_argument("relu: bad gradient shape");
    T* d = dy.data();
    const T* o = out_.data();
    for (std::size_t i = 0; i < dy.size(); ++i) d[i] = o[i] > T(0) ? d[i] : T(0);
    return dy;
  }

 private:
  Tensor<T> out_;
};

template <typename T>
inline T sigmoid(T x) {
  // Split on sign so exp() never overflows.
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
class Sigmoid {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    out_ = x;
    for (auto& v : out_.vec()) v = sigmoid(v);
    return out_;
  }
  Tensor<T> backward(const Tensor<T>& dy) const {
    Tensor<T> dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * out_[i] * (T(1) - out_[i]);
    return dx;
  }

 private:
  Tensor<T> out_;
};

/// [N x C x H x W] -> [N x C], per-channel spatial mean.
template <typename T>
class GlobalAvgPool {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    if (x.rank() != 4 || x.dim(2) * x.dim(3) == 0)
      throw std::invalid_argument("gap: expected non-empty N x C x H x W input");
    in_shape_ = x.shape();
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    Tensor<T> y({n, c});
    for (std::size_t p = 0; p < n * c; ++p) {
      T acc = 0;
      for (std::size_t i = 0; i < hw; ++i) acc += x[p * hw + i];
      y[p] = acc / static_cast<T>(hw);
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) const {
    const std::size_t hw = in_shape_[2] * in_shape_[3];
    Tensor<T> dx(in_shape_);
    for (std::size_t p = 0; p < dy.size(); ++p) {
      const T g = dy[p] / static_cast<T>(hw);
      std::fill(dx.data() + p * hw, dx.data() + (p + 1) * hw, g);
    }
    return dx;
  }

  /// Normalizer Z = H * W of the last input.
  std::size_t normalizer() const { return in_shape_.size() == 4 ? in_shape_[2] * in_shape_[3] : 0; }

 private:
  Shape in_shape_;
};

/// [N x D] -> [N x D'], y = x W^T + b.
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out)
      : in_(in), out_(out), weight_("weight", {out, in}), bias_("bias", {out}) {}

  void init(Rng& rng) {
    he_uniform(weight_.value, in_, rng);
    bias_.value.fill(T(0));
  }

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  const Param<T>& weight() const { return weight_; }
  const Param<T>& bias() const { return bias_; }

  Tensor<T> forward(const Tensor<T>& x) {
    if (x.rank() != 2 || x.dim(1) != in_)
      throw std::invalid_argument("linear: expected N x " + std::to_string(in_) + ", got " +
                                  shape_str(x.shape()));
    input_ = x;
    const std::size_t n = x.dim(0);
    Tensor<T> y({n, out_});
    for (std::size_t s = 0; s < n; ++s)
      std::copy(bias_.value.data(), bias_.value.data() + out_, y.data() + s * out_);
    gemm(false, true, n, out_, in_, T(1), x.data(), in_, weight_.value.data(), in_, T(1), y.data(),
         out_);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const std::size_t n = input_.dim(0);
    if (dy.shape() != Shape{n, out_}) throw std::invalid_argument("linear: bad gradient shape");
    gemm(true, false, out_, in_, n, T(1), dy.data(), out_, input_.data(), in_, T(1),
         weight_.grad.data(), in_);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t o = 0; o < out_; ++o) bias_.grad[o] += dy[s * out_ + o];
    Tensor<T> dx({n, in_});
    gemm(false, false, n, in_, out_, T(1), dy.data(), out_, weight_.value.data(), in_, T(0),
         dx.data(), in_);
    return dx;
  }

  std::vector<ParamRef<T>> params() { return {ref(weight_), ref(bias_)}; }

 private:
  std::size_t in_ = 0, out_ = 0;
  Param<T> weight_, bias_;
  Tensor<T> input_;
};

}  // namespace aqassess::engine
