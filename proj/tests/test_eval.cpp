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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aqassess/error.hpp"
#include "aqassess/eval/metrics.hpp"
#include "aqassess/eval/pipeline.hpp"
#include "json.hpp"
#include "test_util.hpp"

using namespace aqassess;
using namespace aqassess::eval;
using aqassess::testing::TempDir;

namespace {

double brute_auc(const std::vector<double>& s, const std::vector<int>& l) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (l[i] == 1 && l[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return wins / pairs;
}

// Random labels with both classes present; scores drawn from few levels so
// ties are common.
void random_set(Rng& rng, std::size_t n, std::vector<double>& s, std::vector<int>& l) {
  do {
    s.assign(n, 0);
    l.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(6)) / 5.0;
      l[i] = static_cast<int>(rng.below(2));
    }
  } while (std::count(l.begin(), l.end(), 1) == 0 || std::count(l.begin(), l.end(), 0) == 0);
}

}  // namespace

TEST(Auc, MatchesPairEnumerationExactly) {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s;
    std::vector<int> l;
    random_set(rng, 2 + rng.below(19), s, l);
    EXPECT_EQ(auc(s, l), brute_auc(s, l)) << "trial " << trial;
  }
}

TEST(Auc, SeparatedAndRandom) {
  EXPECT_EQ(auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}), 1.0);
  EXPECT_EQ(auc({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}), 0.0);
  EXPECT_EQ(auc({0.5, 0.5}, {1, 0}), 0.5);
  Rng rng(3);
  std::vector<double> s(10000);
  std::vector<int> l(10000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    l[i] = static_cast<int>(rng.below(2));
  }
  EXPECT_NEAR(auc(s, l), 0.5, 0.03);
}

TEST(Auc, InvariantUnderIncreasingMaps) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s;
    std::vector<int> l;
    random_set(rng, 15, s, l);
    for (auto& v : s) v += 0.01 * rng.uniform();
    std::vector<double> e(s), a(s);
    for (auto& v : e) v = std::exp(v);
    for (auto& v : a) v = 3.0 * v - 7.0;
    EXPECT_EQ(auc(e, l), auc(s, l));
    EXPECT_EQ(auc(a, l), auc(s, l));
  }
}

TEST(Auc, FlippedLabelsSumToOne) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s;
    std::vector<int> l;
    random_set(rng, 12, s, l);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += 1e-3 * static_cast<double>(i);  // tie-free
    std::vector<int> f(l);
    for (auto& v : f) v = 1 - v;
    EXPECT_DOUBLE_EQ(auc(s, l) + auc(s, f), 1.0);
  }
}

TEST(Auc, Errors) {
  EXPECT_THROW(auc({0.1, 0.2}, {1, 1}), std::invalid_argument);
  EXPECT_THROW(auc({0.1, 0.2}, {1}), std::invalid_argument);
}

TEST(Fusion, MeanThresholdAndBounds) {
  const std::vector<double> s{0.9, 0.8, 0.7};
  EXPECT_NEAR(fuse_speaker(s), 0.8, 1e-15);
  EXPECT_EQ(classify_speaker(fuse_speaker(s)), SpeakerClass::high_aq);
  const std::vector<double> one{0.37};
  EXPECT_EQ(fuse_speaker(one), 0.37);
  EXPECT_THROW(fuse_speaker({}), std::invalid_argument);

  Rng rng(7);
  std::vector<double> r(9);
  for (auto& v : r) v = rng.uniform();
  auto p = r;
  std::reverse(p.begin(), p.end());
  std::swap(p[1], p[6]);
  EXPECT_NEAR(fuse_speaker(r), fuse_speaker(p), 1e-15);
  EXPECT_GE(fuse_speaker(r), *std::min_element(r.begin(), r.end()));
  EXPECT_LE(fuse_speaker(r), *std::max_element(r.begin(), r.end()));
}

TEST(Fusion, StrictThreshold) {
  EXPECT_EQ(classify_speaker(0.51), SpeakerClass::high_aq);
  EXPECT_EQ(classify_speaker(0.5), SpeakerClass::low_aq);
  EXPECT_EQ(classify_speaker(0.002), SpeakerClass::low_aq);
  EXPECT_EQ(to_string(SpeakerClass::high_aq), "High-AQ");
  EXPECT_EQ(to_string(SpeakerClass::low_aq), "Low-AQ");
}

TEST(Metrics, ReproducesPublishedConfusionMatrix) {
  const auto m = metrics({32, 7, 9, 43});
  EXPECT_NEAR(m.accuracy, 0.824, 5e-4);
  EXPECT_NEAR(m.recall, 0.821, 5e-4);
  EXPECT_NEAR(m.specificity, 0.827, 5e-4);
  EXPECT_NEAR(m.macro_f1, 0.822, 5e-4);
}

TEST(Metrics, PerfectAndDegenerate) {
  const auto m = metrics({1, 0, 0, 1});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.specificity, 1.0);
  EXPECT_EQ(m.macro_f1, 1.0);
  const auto n = metrics({0, 0, 3, 2});  // no positives
  EXPECT_TRUE(std::isnan(n.recall));
  EXPECT_TRUE(std::isnan(n.macro_f1));
  EXPECT_DOUBLE_EQ(n.specificity, 0.4);
  EXPECT_THROW(metrics({}), std::invalid_argument);
}

TEST(Metrics, MatchesDefinitionOnRandomLabelings) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng.below(2));
      pred[i] = static_cast<int>(rng.below(2));
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < n; ++i)
      cm.add(truth[i], pred[i] ? SpeakerClass::high_aq : SpeakerClass::low_aq);
    EXPECT_EQ(cm.total(), n);

    // Per-class F1 straight from the labelings.
    auto class_f1 = [&](int c) {
      double hit = 0, said = 0, is = 0;
      for (std::size_t i = 0; i < n; ++i) {
        hit += truth[i] == c && pred[i] == c;
        said += pred[i] == c;
        is += truth[i] == c;
      }
      if (said == 0 || is == 0) return std::nan("");
      const double p = hit / said, r = hit / is;
      return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
    };
    double correct = 0, pos = 0, neg = 0, tp = 0, tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      correct += truth[i] == pred[i];
      pos += truth[i] == 1;
      neg += truth[i] == 0;
      tp += truth[i] == 1 && pred[i] == 1;
      tn += truth[i] == 0 && pred[i] == 0;
    }
    const auto m = metrics(cm);
    EXPECT_NEAR(m.accuracy, correct / static_cast<double>(n), 1e-12);
    if (pos > 0) {
      EXPECT_NEAR(m.recall, tp / pos, 1e-12);
    }
    if (neg > 0) {
      EXPECT_NEAR(m.specificity, tn / neg, 1e-12);
    }
    const double f = 0.5 * (class_f1(1) + class_f1(0));
    if (std::isnan(f)) {
      EXPECT_TRUE(std::isnan(m.macro_f1));
    } else {
      EXPECT_NEAR(m.macro_f1, f, 1e-12);
    }
  }
}

TEST(Report, PoolsSpeakersAcrossFolds) {
  std::vector<ScoreEntry> s{
      {"a-1", "a", 0.9, 1, 1}, {"a-2", "a", 0.7, 1, 1}, {"b-1", "b", 0.2, 0, 1},
      {"b-2", "b", 0.6, 0, 1}, {"c-1", "c", 0.4, 1, 2}, {"c-2", "c", 0.5, 1, 2},
      {"d-1", "d", 0.1, 0, 2}, {"d-2", "d", 0.3, 0, 2}};
  const auto r = assemble_report(s, 2);
  ASSERT_EQ(r.fold_auc.size(), 2u);
  EXPECT_EQ(r.fold_auc[0], brute_auc({0.9, 0.7, 0.2, 0.6}, {1, 1, 0, 0}));
  EXPECT_EQ(r.fold_auc[1], 1.0);
  EXPECT_EQ(r.pooled_auc, brute_auc({0.9, 0.7, 0.2, 0.6, 0.4, 0.5, 0.1, 0.3}, {1, 1, 0, 0, 1, 1, 0, 0}));
  ASSERT_EQ(r.speakers.size(), 4u);
  EXPECT_NEAR(r.speakers[2].overall, 0.45, 1e-15);  // c: misclassified High-AQ
  EXPECT_EQ(r.speakers[2].decision, SpeakerClass::low_aq);
  EXPECT_EQ(r.confusion.tp, 1u);
  EXPECT_EQ(r.confusion.fn, 1u);
  EXPECT_EQ(r.confusion.fp, 0u);
  EXPECT_EQ(r.confusion.tn, 2u);
  EXPECT_DOUBLE_EQ(r.metrics.accuracy, 0.75);

  const std::string text = r.to_text();
  EXPECT_NE(text.find("pooled utterance auc"), std::string::npos);
  EXPECT_NE(text.find("true High-AQ    1"), std::string::npos);
  std::istringstream lines(r.to_jsonl());
  std::string line;
  std::size_t n = 0, folds = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    folds += j.at("type") == "fold";
    ++n;
  }
  EXPECT_EQ(folds, 2u);
  EXPECT_EQ(n, 1 + 2 + 1 + 8 + 4 + 1 + 1u);
}

TEST(Report, SingleClassFoldHasNoAuc) {
  std::vector<ScoreEntry> s{{"a-1", "a", 0.9, 1, 1}, {"b-1", "b", 0.2, 0, 2}, {"c-1", "c", 0.7, 1, 2}};
  const auto r = assemble_report(s, 2);
  EXPECT_TRUE(std::isnan(r.fold_auc[0]));
  EXPECT_EQ(r.fold_auc[1], 1.0);
  EXPECT_NE(r.to_text().find("n/a"), std::string::npos);
  EXPECT_NE(r.to_jsonl().find("\"auc\":null"), std::string::npos);
  EXPECT_THROW(assemble_report({}, 2), DataError);
}

namespace {

// Twelve short synthetic speakers, two 3 s utterances each.
struct SmallCorpus {
  TempDir dir{"eval-corpus"};
  std::vector<corpus::SpeakerRecord> speakers;
  SmallCorpus() {
    corpus::SynthProfile p;
    p.recording_seconds = 6.0;
    p.recordings_per_speaker = 1;
    speakers = corpus::synth_corpus(12, p, 5, dir.path());
  }
};

SmallCorpus& small_corpus() {
  static SmallCorpus c;
  return c;
}

models::ModelSpec small_cnn() {
  models::ModelSpec s;
  s.kind = models::ModelKind::cnn;
  s.channels = {2, 3, 3, 2, 2};
  return s;
}

train::HyperParams small_hp() {
  train::HyperParams hp;
  hp.batch_size = 8;
  hp.lr = 3e-3;
  hp.max_epochs = 2;
  hp.patience = 2;
  hp.seed = 13;
  return hp;
}

}  // namespace

TEST(Dataset, ExtractsFixedWindowsAndRoundTrips) {
  const auto& c = small_corpus();
  const auto ds = extract_dataset(c.speakers, dsp::FeatureKind::logmel128, corpus::Segmentation::fixed3s);
  ASSERT_EQ(ds.items.size(), 24u);
  for (const auto& it : ds.items) {
    EXPECT_EQ(it.features.frames(), 300u);
    EXPECT_EQ(it.features.dims(), 128u);
  }
  TempDir out("eval-ds");
  save_dataset(out.path(), ds);
  const auto back = load_dataset(out.path());
  ASSERT_EQ(back.items.size(), ds.items.size());
  EXPECT_EQ(back.kind, ds.kind);
  EXPECT_EQ(back.segmentation, ds.segmentation);
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    EXPECT_EQ(back.items[i].id, ds.items[i].id);
    EXPECT_EQ(back.items[i].label, ds.items[i].label);
    for (std::size_t k = 0; k < ds.items[i].features.values.values.size(); k += 97)
      EXPECT_EQ(back.items[i].features.values.values[k],
                static_cast<double>(static_cast<float>(ds.items[i].features.values.values[k])));
  }
  EXPECT_THROW(load_dataset(out.path() / "nowhere"), DataError);
}

TEST(Dataset, ManualSegmentationFollowsBoundaries) {
  const auto& c = small_corpus();
  const auto ds = extract_dataset(c.speakers, dsp::FeatureKind::mfcc39, corpus::Segmentation::manual);
  std::size_t expect = 0;
  for (const auto& s : c.speakers)
    for (const auto& r : s.recordings) expect += r.boundaries->size() - 1;
  EXPECT_EQ(ds.items.size(), expect);
  for (const auto& it : ds.items) EXPECT_EQ(it.features.dims(), 39u);
}

TEST(Folds, NormalisationUsesTrainingSpeakersOnly) {
  const auto& c = small_corpus();
  const auto ds = extract_dataset(c.speakers, dsp::FeatureKind::logmel128, corpus::Segmentation::fixed3s);
  const auto plan = corpus::make_folds(c.speakers, 3, 0.25, 2);
  const auto fd = prepare_fold(ds, plan.folds[0], 1);
  EXPECT_EQ(fd.norm.fitted_on, 1);
  // Normalised training frames have zero mean in every bin; test frames need not.
  std::vector<double> mean(128, 0.0);
  std::size_t frames = 0;
  for (const auto& e : fd.train) {
    for (std::size_t t = 0; t < e.features->frames(); ++t)
      for (std::size_t d = 0; d < 128; ++d) mean[d] += e.features->values.at(t, d);
    frames += e.features->frames();
  }
  for (double m : mean) EXPECT_NEAR(m / static_cast<double>(frames), 0.0, 1e-9);
  std::vector<const dsp::FeatureMatrix*> train_raw;
  for (const auto* u : select(ds, plan.folds[0].train)) train_raw.push_back(&u->features);
  const auto ref = dsp::fit_norm(std::span<const dsp::FeatureMatrix* const>(train_raw));
  EXPECT_EQ(ref.mean, fd.norm.mean);
  for (const auto& e : fd.test)
    EXPECT_NE(std::find(plan.folds[0].test.begin(), plan.folds[0].test.end(), e.speaker_id),
              plan.folds[0].test.end());
  EXPECT_EQ(fd.train.size() + fd.valid.size() + fd.test.size(), ds.items.size());
}

TEST(CrossValidate, CheckpointsReproduceTheReport) {
  const auto& c = small_corpus();
  const auto ds = extract_dataset(c.speakers, dsp::FeatureKind::logmel128, corpus::Segmentation::fixed3s);
  const auto plan = corpus::make_folds(c.speakers, 3, 0.25, 2);
  TempDir out("eval-cv");
  CvOptions opt;
  opt.out_dir = out.path();
  const auto r = cross_validate(ds, plan, small_cnn(), small_hp(), opt);
  EXPECT_EQ(r.scores.size(), ds.items.size());
  EXPECT_EQ(r.speakers.size(), 12u);
  EXPECT_EQ(r.confusion.total(), 12u);
  EXPECT_EQ(r.fold_auc.size(), 3u);
  for (std::size_t f = 1; f <= 3; ++f) {
    EXPECT_TRUE(std::filesystem::exists(out.path() / checkpoint_name(f, models::ModelKind::cnn)));
    EXPECT_TRUE(std::filesystem::exists(out.path() / log_name(f, models::ModelKind::cnn)));
  }
  const auto again = evaluate_checkpoints(ds, plan, out.path(), models::ModelKind::cnn);
  EXPECT_EQ(again.to_jsonl(), r.to_jsonl());
  EXPECT_EQ(again.to_text(), r.to_text());

  // Refusals: other features, another plan, another model kind.
  const auto mf = extract_dataset(c.speakers, dsp::FeatureKind::mfcc39, corpus::Segmentation::fixed3s);
  EXPECT_THROW(evaluate_checkpoints(mf, plan, out.path(), models::ModelKind::cnn), DataError);
  const auto other = corpus::make_folds(c.speakers, 3, 0.25, 99);
  EXPECT_THROW(evaluate_checkpoints(ds, other, out.path(), models::ModelKind::cnn), DataError);
  EXPECT_THROW(evaluate_checkpoints(ds, plan, out.path(), models::ModelKind::gru128), DataError);
}

TEST(CrossValidate, RejectsCnnOnManualSegments) {
  const auto& c = small_corpus();
  const auto ds = extract_dataset(c.speakers, dsp::FeatureKind::logmel128, corpus::Segmentation::manual);
  const auto plan = corpus::make_folds(c.speakers, 3, 0.25, 2);
  try {
    cross_validate(ds, plan, small_cnn(), small_hp());
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_STREQ(e.what(), "cnn requires fixed3s");
  }
}
