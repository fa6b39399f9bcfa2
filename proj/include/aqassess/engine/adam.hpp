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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aqassess/engine/tensor.hpp"

namespace aqassess::engine {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-4;  // coupled L2: added to the gradient
};

template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m, v;
  std::uint64_t step = 0;
};

/// Bias-corrected Adam with L2 weight decay folded into the gradient.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  AdamState<T>& state() { return state_; }
  const AdamState<T>& state() const { return state_; }

  void step(const std::vector<ParamRef<T>>& params) {
    if (state_.m.empty()) {
      for (const auto& p : params) {
        state_.m.emplace_back(p.value->shape());
        state_.v.emplace_back(p.value->shape());
      }
    }
    if (state_.m.size() != params.size()) throw std::invalid_argument("adam: parameter list changed");
    ++state_.step;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(state_.step));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(state_.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Tensor<T>& w = *params[k].value;
      const Tensor<T>& g = *params[k].grad;
      Tensor<T>& m = state_.m[k];
      Tensor<T>& v = state_.v[k];
      if (g.shape() != w.shape() || m.shape() != w.shape())
        throw std::invalid_argument("adam: shape mismatch for " + params[k].name);
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double grad = static_cast<double>(g[i]) + cfg_.weight_decay * w[i];
        const double mi = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * grad;
        const double vi = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * grad * grad;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double update = cfg_.lr * (mi / c1) / (std::sqrt(vi / c2) + cfg_.eps);
        w[i] = static_cast<T>(w[i] - update);
      }
    }
  }

 private:
  AdamConfig cfg_;
  AdamState<T> state_;
};

}  // namespace aqassess::engine
