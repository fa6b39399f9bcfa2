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
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqassess::eval {

/// Area under the ROC curve as the Mann-Whitney statistic with midranks for
/// tied scores, normalised by n_pos * n_neg.
template <typename S>
double auc(std::span<const S> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: size mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // ranks i+1 .. j share their mean
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) {
        rank_sum += mid;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auc: need both labels");
  const double u = rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  return auc<double>(std::span<const double>(scores), std::span<const int>(labels));
}

/// Speaker-level overall score: mean of the utterance scores.
inline double fuse_speaker(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("fuse_speaker: speaker has no utterances");
  double s = 0;
  for (double v : scores) s += v;
  return s / static_cast<double>(scores.size());
}

enum class SpeakerClass { low_aq = 0, high_aq = 1 };

inline std::string to_string(SpeakerClass c) { return c == SpeakerClass::high_aq ? "High-AQ" : "Low-AQ"; }

/// High-AQ only when the overall score is strictly above the threshold.
inline SpeakerClass classify_speaker(double overall, double threshold = 0.5) {
  return overall > threshold ? SpeakerClass::high_aq : SpeakerClass::low_aq;
}

/// Positive class is High-AQ.
struct ConfusionMatrix {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;

  std::size_t total() const { return tp + fn + fp + tn; }
  void add(int label, SpeakerClass predicted) {
    const bool pos = predicted == SpeakerClass::high_aq;
    if (label == 1)
      ++(pos ? tp : fn);
    else
      ++(pos ? fp : tn);
  }
};

/// NaN marks a metric whose denominator is zero.
struct Metrics {
  double accuracy = 0, macro_f1 = 0, recall = 0, specificity = 0;
};

inline double safe_ratio(double num, double den) {
  return den > 0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

inline double f1(double tp, double fp, double fn) {
  const double p = safe_ratio(tp, tp + fp), r = safe_ratio(tp, tp + fn);
  if (std::isnan(p) || std::isnan(r)) return std::numeric_limits<double>::quiet_NaN();
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("metrics: empty confusion matrix");
  const auto tp = static_cast<double>(cm.tp), fn = static_cast<double>(cm.fn);
  const auto fp = static_cast<double>(cm.fp), tn = static_cast<double>(cm.tn);
  Metrics m;
  m.accuracy = (tp + tn) / static_cast<double>(cm.total());
  m.recall = safe_ratio(tp, tp + fn);
  m.specificity = safe_ratio(tn, tn + fp);
  m.macro_f1 = 0.5 * (f1(tp, fp, fn) + f1(tn, fn, fp));
  return m;
}

}  // namespace aqassess::eval
