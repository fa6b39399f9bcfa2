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

#include <span>
#include <string>
#include <vector>

#include "aqassess/dsp/features.hpp"

namespace aqassess::dsp {

inline constexpr double kNormEps = 1e-8;

/// Per-dimension mean and (population) variance pooled over training frames.
struct NormStats {
  FeatureKind kind = FeatureKind::logmel128;
  std::vector<double> mean;
  std::vector<double> variance;
  int fitted_on = -1;  // fold id, -1 when not fold-bound
};

NormStats fit_norm(std::span<const FeatureMatrix> features, int fold = -1);
NormStats fit_norm(std::span<const FeatureMatrix* const> features, int fold = -1);
/// (x - mean) / sqrt(variance + 1e-8) per dimension.
FeatureMatrix apply_norm(const FeatureMatrix& f, const NormStats& s);

std::string to_json(const NormStats& s);
NormStats norm_from_json(const std::string& text);

}  // namespace aqassess::dsp
