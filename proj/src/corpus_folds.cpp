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

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "aqassess/corpus/corpus.hpp"
#include "aqassess/error.hpp"
#include "aqassess/rng.hpp"
#include "json.hpp"

namespace aqassess::corpus {

namespace {

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

}  // namespace

FoldPlan make_folds(const std::vector<SpeakerRecord>& speakers, std::size_t k, double valid_frac,
                    std::uint64_t seed, double aq_threshold) {
  if (k < 2) throw UsageError("make_folds: k must be >= 2");
  if (!(valid_frac >= 0.0 && valid_frac < 1.0)) throw UsageError("make_folds: valid_frac in [0, 1)");

  std::map<std::string, int> label;
  std::array<std::vector<std::string>, 2> by_label;
  for (const auto& s : speakers) {
    const int l = label_for_aq(s.aq, aq_threshold);
    if (!label.emplace(s.speaker_id, l).second)
      throw DataError("make_folds: duplicate speaker id " + s.speaker_id);
    by_label[static_cast<std::size_t>(l)].push_back(s.speaker_id);
  }
  for (int l = 0; l < 2; ++l)
    if (by_label[static_cast<std::size_t>(l)].size() < k)
      throw DataError("make_folds: too few speakers for stratification (" +
                      std::to_string(by_label[static_cast<std::size_t>(l)].size()) +
                      " with label " + std::to_string(l) + ", need >= " + std::to_string(k) + ")");

  Rng rng(seed);
  for (auto& v : by_label) std::sort(v.begin(), v.end());
  rng.shuffle(by_label[1]);
  rng.shuffle(by_label[0]);

  FoldPlan plan;
  plan.k = k;
  plan.valid_frac = valid_frac;
  plan.seed = seed;
  plan.aq_threshold = aq_threshold;
  plan.folds.resize(k);
  std::size_t slot = 0;
  for (int l : {1, 0})
    for (const auto& id : by_label[static_cast<std::size_t>(l)]) plan.folds[slot++ % k].test.push_back(id);

  for (std::size_t f = 0; f < k; ++f) {
    Fold& fold = plan.folds[f];
    const std::set<std::string> test(fold.test.begin(), fold.test.end());
    std::array<std::vector<std::string>, 2> pool;
    for (int l : {1, 0})
      for (const auto& id : by_label[static_cast<std::size_t>(l)])
        if (!test.count(id)) pool[static_cast<std::size_t>(l)].push_back(id);
    const std::size_t n_pool = pool[0].size() + pool[1].size();

    // Largest-remainder split of the validation quota, at least one per class.
    std::array<std::size_t, 2> quota{0, 0};
    const std::size_t n_valid = round_half_up(valid_frac * static_cast<double>(n_pool));
    if (n_valid > 0) {
      std::array<double, 2> exact{};
      std::size_t assigned = 0;
      for (std::size_t l = 0; l < 2; ++l) {
        exact[l] = static_cast<double>(n_valid) * static_cast<double>(pool[l].size()) /
                   static_cast<double>(n_pool);
        quota[l] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(exact[l])));
        assigned += quota[l];
      }
      while (assigned < n_valid) {
        const std::size_t l = (exact[1] - std::floor(exact[1]) >= exact[0] - std::floor(exact[0])) ? 1 : 0;
        ++quota[l];
        exact[l] = std::floor(exact[l]);  // consume the remainder
        ++assigned;
      }
    }
    Rng vrng(derive_seed(seed, f + 1));
    std::set<std::string> valid;
    for (std::size_t l = 0; l < 2; ++l) {
      auto cand = pool[l];
      std::sort(cand.begin(), cand.end());
      vrng.shuffle(cand);
      if (quota[l] >= cand.size())
        throw DataError("make_folds: too few speakers for stratification (fold " +
                        std::to_string(f + 1) + " has no label-" + std::to_string(l) +
                        " training speaker left after validation)");
      valid.insert(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(quota[l]));
    }
    for (std::size_t l = 0; l < 2; ++l)
      for (const auto& id : pool[l]) (valid.count(id) ? fold.valid : fold.train).push_back(id);
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.valid.begin(), fold.valid.end());
    std::sort(fold.test.begin(), fold.test.end());
  }
  return plan;
}

std::string to_json(const FoldPlan& plan) {
  nlohmann::json j;
  j["k"] = plan.k;
  j["valid_frac"] = plan.valid_frac;
  j["seed"] = plan.seed;
  j["aq_threshold"] = plan.aq_threshold;
  j["folds"] = nlohmann::json::array();
  for (const auto& f : plan.folds)
    j["folds"].push_back({{"train", f.train}, {"valid", f.valid}, {"test", f.test}});
  return j.dump(2);
}

FoldPlan fold_plan_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    FoldPlan p;
    p.k = j.at("k").get<std::size_t>();
    p.valid_frac = j.at("valid_frac").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.aq_threshold = j.value("aq_threshold", kDefaultAqThreshold);
    for (const auto& jf : j.at("folds"))
      p.folds.push_back({jf.at("train").get<std::vector<std::string>>(),
                         jf.at("valid").get<std::vector<std::string>>(),
                         jf.at("test").get<std::vector<std::string>>()});
    if (p.folds.size() != p.k) throw DataError("fold count does not match k");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("fold plan: ") + e.what());
  }
}

void save_fold_plan(const std::filesystem::path& path, const FoldPlan& plan) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << to_json(plan) << '\n';
}

FoldPlan load_fold_plan(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("missing fold plan " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return fold_plan_from_json(ss.str());
}

}  // namespace aqassess::corpus
