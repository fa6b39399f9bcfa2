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

#include "aqassess/dsp/normalize.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace aqassess::dsp {

NormStats fit_norm(std::span<const FeatureMatrix* const> features, int fold) {
  if (features.empty()) throw std::invalid_argument("fit_norm: empty training set");
  NormStats s;
  s.kind = features.front()->kind;
  s.fitted_on = fold;
  const std::size_t d = features.front()->dims();
  s.mean.assign(d, 0.0);
  s.variance.assign(d, 0.0);
  std::size_t count = 0;
  for (const FeatureMatrix* f : features) {
    if (f->kind != s.kind || f->dims() != d)
      throw std::invalid_argument("fit_norm: feature dimension mismatch");
    for (std::size_t r = 0; r < f->frames(); ++r)
      for (std::size_t c = 0; c < d; ++c) s.mean[c] += f->values.at(r, c);
    count += f->frames();
  }
  if (count == 0) throw std::invalid_argument("fit_norm: no frames");
  for (auto& m : s.mean) m /= static_cast<double>(count);
  for (const FeatureMatrix* f : features)
    for (std::size_t r = 0; r < f->frames(); ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const double e = f->values.at(r, c) - s.mean[c];
        s.variance[c] += e * e;
      }
  for (auto& v : s.variance) v /= static_cast<double>(count);
  return s;
}

NormStats fit_norm(std::span<const FeatureMatrix> features, int fold) {
  std::vector<const FeatureMatrix*> ptrs;
  ptrs.reserve(features.size());
  for (const auto& f : features) ptrs.push_back(&f);
  return fit_norm(std::span<const FeatureMatrix* const>(ptrs), fold);
}

FeatureMatrix apply_norm(const FeatureMatrix& f, const NormStats& s) {
  if (f.kind != s.kind || f.dims() != s.mean.size())
    throw std::invalid_argument("apply_norm: statistics for " + to_string(s.kind) + " (" +
                                std::to_string(s.mean.size()) + " dims) applied to " +
                                to_string(f.kind) + " (" + std::to_string(f.dims()) + " dims)");
  FeatureMatrix out = f;
  std::vector<double> inv(s.variance.size());
  for (std::size_t c = 0; c < inv.size(); ++c) inv[c] = 1.0 / std::sqrt(s.variance[c] + kNormEps);
  for (std::size_t r = 0; r < out.frames(); ++r)
    for (std::size_t c = 0; c < out.dims(); ++c)
      out.values.at(r, c) = (out.values.at(r, c) - s.mean[c]) * inv[c];
  return out;
}

std::string to_json(const NormStats& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  j["fitted_on"] = s.fitted_on;
  j["mean"] = s.mean;
  j["variance"] = s.variance;
  return j.dump();
}

NormStats norm_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  NormStats s;
  s.kind = parse_feature_kind(j.at("kind").get<std::string>());
  s.fitted_on = j.at("fitted_on").get<int>();
  s.mean = j.at("mean").get<std::vector<double>>();
  s.variance = j.at("variance").get<std::vector<double>>();
  if (s.mean.size() != s.variance.size()) throw std::invalid_argument("norm stats: size mismatch");
  return s;
}

}  // namespace aqassess::dsp
