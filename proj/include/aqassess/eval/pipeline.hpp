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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aqassess/corpus/corpus.hpp"
#include "aqassess/dsp/features.hpp"
#include "aqassess/dsp/normalize.hpp"
#include "aqassess/eval/metrics.hpp"
#include "aqassess/models/build.hpp"
#include "aqassess/train/train.hpp"

namespace aqassess::eval {

struct UtteranceFeatures {
  std::string id;
  std::string speaker_id;
  int topic_id = 1;
  int label = 0;
  dsp::FeatureMatrix features;
};

/// Features of every utterance of a corpus under one extraction setting.
struct Dataset {
  dsp::FeatureKind kind = dsp::FeatureKind::logmel128;
  corpus::Segmentation segmentation = corpus::Segmentation::fixed3s;
  std::vector<UtteranceFeatures> items;
};

Dataset extract_dataset(const std::vector<corpus::SpeakerRecord>& speakers, dsp::FeatureKind kind,
                        corpus::Segmentation segmentation, const dsp::FrameSpec& spec = {},
                        double aq_threshold = corpus::kDefaultAqThreshold);

/// `dir/index.jsonl` (one line per utterance plus a header line) and
/// `dir/feats/{id}.aqfx`.
void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& dir);

struct ScoreEntry {
  std::string utterance_id;
  std::string speaker_id;
  double score = 0;
  int label = 0;
  std::size_t fold = 0;  // 1-based
};

struct SpeakerResult {
  std::string speaker_id;
  int label = 0;
  std::size_t fold = 0;
  std::size_t utterances = 0;
  double overall = 0;
  SpeakerClass decision = SpeakerClass::low_aq;
};

struct CvReport {
  std::string model_kind;
  std::string feature_kind;
  std::string segmentation;
  std::uint64_t seed = 0;
  std::vector<double> fold_auc;  // NaN when a fold's test set holds one label
  double pooled_auc = 0;
  std::vector<ScoreEntry> scores;
  std::vector<SpeakerResult> speakers;
  ConfusionMatrix confusion;
  Metrics metrics;

  std::string to_text() const;
  std::string to_jsonl() const;
};

/// Builds the report from per-utterance test scores: fold and pooled AUC,
/// speaker fusion, one pooled confusion matrix.
CvReport assemble_report(std::vector<ScoreEntry> scores, std::size_t k);

/// Items of `ds` whose speaker is in `ids`, in dataset order.
std::vector<const UtteranceFeatures*> select(const Dataset& ds, const std::vector<std::string>& ids);

/// Normalised copy of a fold's features (statistics from its training
/// speakers) and the examples built on it.
struct FoldData {
  dsp::NormStats norm;
  std::vector<dsp::FeatureMatrix> features;
  std::vector<train::Example> train, valid, test;
};
FoldData prepare_fold(const Dataset& ds, const corpus::Fold& fold, std::size_t fold_index);

struct CvOptions {
  std::optional<std::filesystem::path> out_dir;  // checkpoints + logs per fold
  std::function<void(std::size_t fold, const train::EpochRecord&)> on_epoch;
};

/// Checkpoint file name for fold n (1-based).
std::string checkpoint_name(std::size_t fold, models::ModelKind kind);
std::string log_name(std::size_t fold, models::ModelKind kind);

/// Trains one model per fold, scores each fold's test speakers and pools
/// the decisions. The model of fold n is seeded with derive_seed(seed, n).
CvReport cross_validate(const Dataset& ds, const corpus::FoldPlan& plan,
                        const models::ModelSpec& spec, const train::HyperParams& hp,
                        const CvOptions& options = {});

/// Scores the test speakers of every fold from checkpoints written by
/// cross_validate. Throws DataError when a checkpoint was trained on other
/// features, another fold plan or another model kind.
CvReport evaluate_checkpoints(const Dataset& ds, const corpus::FoldPlan& plan,
                              const std::filesystem::path& dir, models::ModelKind kind);

}  // namespace aqassess::eval
