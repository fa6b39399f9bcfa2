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
#include <span>
#include <stdexcept>
#include <vector>

#include "aqassess/engine/layers.hpp"

namespace aqassess::engine {

inline constexpr double kScoreClamp = 1e-7;

/// Binary cross-entropy of one sigmoid score; the score is clamped into
/// [1e-7, 1 - 1e-7] first.
inline double bce_loss(double score, int label) {
  const double s = std::clamp(score, kScoreClamp, 1.0 - kScoreClamp);
  return -(label ? std::log(s) : std::log(1.0 - s));
}

template <typename T>
struct LossResult {
  double loss = 0;              // batch mean
  std::vector<T> dlogits;       // d(mean loss)/d(logit)
  std::vector<T> scores;
};

/// Mean BCE over a batch of pre-sigmoid logits. The logit gradient is
/// (score - label) / N.
template <typename T>
LossResult<T> bce_with_logits(std::span<const T> logits, std::span<const int> labels) {
  if (logits.size() != labels.size() || logits.empty())
    throw std::invalid_argument("bce: logits and labels must be non-empty and equal length");
  LossResult<T> r;
  const double inv_n = 1.0 / static_cast<double>(logits.size());
  r.dlogits.resize(logits.size());
  r.scores.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const T s = sigmoid(logits[i]);
    r.scores[i] = s;
    r.loss += bce_loss(static_cast<double>(s), labels[i]) * inv_n;
    r.dlogits[i] = static_cast<T>((static_cast<double>(s) - labels[i]) * inv_n);
  }
  return r;
}

}  // namespace aqassess::engine
