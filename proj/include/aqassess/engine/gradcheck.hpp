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
#include <functional>
#include <vector>

#include "aqassess/engine/tensor.hpp"
#include "aqassess/rng.hpp"

namespace aqassess::engine {

struct GradCheckResult {
  double max_rel_error = 0;
  std::size_t checked = 0;
};

/// Relative error with an absolute floor so near-zero gradients compare on
/// absolute scale.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central-difference oracle. `loss` recomputes the scalar objective from the
/// current values of `targets`; `analytic` holds the backward-pass gradient
/// for each target, captured beforehand. At most `max_per_target` randomly
/// chosen elements of each target are perturbed (0 = all).
inline GradCheckResult grad_check(const std::function<double()>& loss,
                                  const std::vector<Tensor<double>*>& targets,
                                  const std::vector<Tensor<double>>& analytic, double h = 1e-5,
                                  std::size_t max_per_target = 0, std::uint64_t seed = 1) {
  GradCheckResult res;
  Rng rng(seed);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    Tensor<double>& x = *targets[k];
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (max_per_target && idx.size() > max_per_target) {
      rng.shuffle(idx);
      idx.resize(max_per_target);
    }
    for (std::size_t i : idx) {
      const double orig = x[i];
      x[i] = orig + h;
      const double up = loss();
      x[i] = orig - h;
      const double down = loss();
      x[i] = orig;
      const double numeric = (up - down) / (2 * h);
      res.max_rel_error = std::max(res.max_rel_error, relative_error(analytic[k][i], numeric));
      ++res.checked;
    }
  }
  return res;
}

}  // namespace aqassess::engine
